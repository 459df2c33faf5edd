#ifndef EASYUQ_TYPES_HPP
#define EASYUQ_TYPES_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace easyuq {

// Tolerance used when validating cumulative-probability vectors.
inline constexpr double kCdfTol = 1e-12;

// Paired single-valued model outputs x and observed outcomes y.
// All values must be finite; duplicates in either column are allowed.
class TrainingData {
 public:
  TrainingData(std::vector<double> x, std::vector<double> y);

  std::size_t size() const { return x_.size(); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

// Strictly increasing outcome values; ties are identified by exact
// floating-point equality.
class ThresholdSet {
 public:
  // Values must already be sorted, unique and finite.
  explicit ThresholdSet(std::vector<double> sorted_unique);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  const std::vector<double>& values() const { return values_; }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

  // Index of an exactly matching value, or size() if absent.
  std::size_t index_of(double value) const;

 private:
  std::vector<double> values_;
};

// Sorts and deduplicates a sample into a ThresholdSet.
ThresholdSet unique_thresholds(std::span<const double> values);

// A discrete predictive distribution: cumulative probabilities at the
// thresholds, nondecreasing with final entry 1.  The threshold set is
// shared so that the rows of a fitted model do not copy it.
class StepCdf {
 public:
  StepCdf(std::shared_ptr<const ThresholdSet> thresholds,
          std::vector<double> cumulative);

  const ThresholdSet& thresholds() const { return *thresholds_; }
  const std::shared_ptr<const ThresholdSet>& thresholds_ptr() const {
    return thresholds_;
  }
  const std::vector<double>& cumulative() const { return cumulative_; }
  std::size_t size() const { return cumulative_.size(); }

  // P(Y <= y); right-continuous step evaluation.
  double cdf(double y) const;

  // Lower alpha-quantile min{t_j : F(t_j) >= alpha}, alpha in (0,1).
  double quantile(double alpha) const;

  // Point masses w_j = F(t_j) - F(t_{j-1}).  Differences within kCdfTol
  // below zero are clamped to zero.
  std::vector<double> point_masses() const;

 private:
  std::shared_ptr<const ThresholdSet> thresholds_;
  std::vector<double> cumulative_;
};

// Student-t kernel parameters: degrees of freedom nu (infinity selects the
// Gaussian limit) and bandwidth h > 0.
struct KernelSpec {
  double nu;
  double h;

  KernelSpec(double nu, double h);
  static KernelSpec gaussian(double h);
  bool is_gaussian() const;
};

// The degrees-of-freedom grid searched by kernel tuning.
std::span<const double> kernel_nu_grid();

// A location-scale kernel mixture: weights w_j at locations t_j, all
// components sharing one kernel.  Zero-weight components are dropped and
// the remaining weights are renormalized to sum to one.
class MixtureDistribution {
 public:
  MixtureDistribution(std::vector<double> locations,
                      std::vector<double> weights, KernelSpec kernel);

  const std::vector<double>& locations() const { return locations_; }
  const std::vector<double>& weights() const { return weights_; }
  const KernelSpec& kernel() const { return kernel_; }
  std::size_t size() const { return locations_.size(); }

  double pdf(double y) const;
  double log_pdf(double y) const;
  double cdf(double y) const;

  // Inverts cdf by bracketed bisection to 1e-9 in y units.  Throws
  // std::runtime_error if no bracket is found after 60 expansions.
  double quantile(double alpha) const;

 private:
  std::vector<double> locations_;
  std::vector<double> weights_;
  KernelSpec kernel_;
};

}  // namespace easyuq

#endif  // EASYUQ_TYPES_HPP
