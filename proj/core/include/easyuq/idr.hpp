#ifndef EASYUQ_IDR_HPP
#define EASYUQ_IDR_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "easyuq/types.hpp"

namespace easyuq {

// Isotonic distributional regression with a single real covariate.  Holds
// the sorted distinct covariate values, the outcome thresholds, and a
// k x m matrix of cumulative probabilities whose rows are step CDFs and
// whose columns are nonincreasing in the covariate (stochastic ordering).
// Immutable once fitted; safe to share across threads.
class IdrModel {
 public:
  IdrModel(std::vector<double> unique_x,
           std::shared_ptr<const ThresholdSet> thresholds,
           std::vector<double> cdf_matrix);

  std::size_t k() const { return unique_x_.size(); }    // distinct covariates
  std::size_t m() const { return thresholds_->size(); } // thresholds

  const std::vector<double>& unique_x() const { return unique_x_; }
  const ThresholdSet& thresholds() const { return *thresholds_; }
  const std::shared_ptr<const ThresholdSet>& thresholds_ptr() const {
    return thresholds_;
  }

  std::span<const double> row(std::size_t r) const;
  StepCdf row_cdf(std::size_t r) const;

  // Index of an exactly matching training covariate, or k() if absent.
  std::size_t row_index_of(double x) const;

  // Predictive CDF at covariate x: the stored row at an exact match,
  // clamped to the first/last row outside the training range, and the
  // columnwise convex combination of the two neighbouring rows otherwise.
  StepCdf predict(double x) const;

 private:
  std::vector<double> unique_x_;
  std::shared_ptr<const ThresholdSet> thresholds_;
  std::vector<double> cdf_;  // row-major k x m
};

// Fits the model: for every threshold t_j the column is the antitonic
// least-squares fit of the indicators 1{y_i <= t_j} ordered by x, with
// tied covariates pooled into one weighted point.
IdrModel fit_idr(const TrainingData& data);

// JSON serialization: {"unique_x": [...], "thresholds": [...],
// "cdf": [[...], ...]}.  Numbers round-trip bit-exactly.
std::string to_json(const IdrModel& model);
IdrModel idr_from_json(const std::string& text);
void save_model(const IdrModel& model, const std::string& path);
IdrModel load_model(const std::string& path);

}  // namespace easyuq

#endif  // EASYUQ_IDR_HPP
