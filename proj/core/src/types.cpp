#include "easyuq/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "easyuq/smoothing.hpp"

namespace easyuq {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + " contains a non-finite value");
    }
  }
}

}  // namespace

TrainingData::TrainingData(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.empty() || y_.empty()) {
    throw std::invalid_argument("empty sample");
  }
  if (x_.size() != y_.size()) {
    throw std::invalid_argument("x and y have different lengths");
  }
  require_finite(x_, "x");
  require_finite(y_, "y");
}

ThresholdSet::ThresholdSet(std::vector<double> sorted_unique)
    : values_(std::move(sorted_unique)) {
  if (values_.empty()) {
    throw std::invalid_argument("empty sample");
  }
  require_finite(values_, "thresholds");
  for (std::size_t j = 1; j < values_.size(); ++j) {
    if (!(values_[j - 1] < values_[j])) {
      throw std::invalid_argument("thresholds must be strictly increasing");
    }
  }
}

std::size_t ThresholdSet::index_of(double value) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), value);
  if (it != values_.end() && *it == value) {
    return static_cast<std::size_t>(it - values_.begin());
  }
  return values_.size();
}

ThresholdSet unique_thresholds(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("empty sample");
  }
  std::vector<double> sorted(values.begin(), values.end());
  require_finite(sorted, "sample");
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return ThresholdSet(std::move(sorted));
}

StepCdf::StepCdf(std::shared_ptr<const ThresholdSet> thresholds,
                 std::vector<double> cumulative)
    : thresholds_(std::move(thresholds)), cumulative_(std::move(cumulative)) {
  if (!thresholds_) {
    throw std::invalid_argument("null threshold set");
  }
  if (cumulative_.size() != thresholds_->size()) {
    throw std::invalid_argument("cumulative length does not match thresholds");
  }
  double prev = 0.0;
  for (double c : cumulative_) {
    if (!(c >= -kCdfTol && c <= 1.0 + kCdfTol)) {
      throw std::invalid_argument("cumulative probability outside [0, 1]");
    }
    if (c < prev - kCdfTol) {
      throw std::invalid_argument("cumulative probabilities must be nondecreasing");
    }
    prev = c;
  }
  if (std::abs(cumulative_.back() - 1.0) > kCdfTol) {
    throw std::invalid_argument("final cumulative probability must be 1");
  }
}

double StepCdf::cdf(double y) const {
  const auto& t = thresholds_->values();
  auto it = std::upper_bound(t.begin(), t.end(), y);
  if (it == t.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - t.begin()) - 1];
}

double StepCdf::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("quantile level must be in (0, 1)");
  }
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), alpha);
  if (it == cumulative_.end()) --it;  // guards the 1 - kCdfTol corner
  return (*thresholds_)[static_cast<std::size_t>(it - cumulative_.begin())];
}

std::vector<double> StepCdf::point_masses() const {
  std::vector<double> w(cumulative_.size());
  double prev = 0.0;
  for (std::size_t j = 0; j < cumulative_.size(); ++j) {
    w[j] = std::max(cumulative_[j] - prev, 0.0);
    prev = cumulative_[j];
  }
  return w;
}

KernelSpec::KernelSpec(double nu_in, double h_in) : nu(nu_in), h(h_in) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("bandwidth must be positive and finite");
  }
  if (std::isnan(nu) || !(nu > 0.0)) {
    throw std::invalid_argument("degrees of freedom must be positive");
  }
}

KernelSpec KernelSpec::gaussian(double h) {
  return KernelSpec(std::numeric_limits<double>::infinity(), h);
}

bool KernelSpec::is_gaussian() const { return std::isinf(nu); }

std::span<const double> kernel_nu_grid() {
  static const double grid[] = {2.0,  3.0,  4.0, 5.0,
                                10.0, 20.0, std::numeric_limits<double>::infinity()};
  return {grid, 7};
}

MixtureDistribution::MixtureDistribution(std::vector<double> locations,
                                         std::vector<double> weights,
                                         KernelSpec kernel)
    : kernel_(kernel) {
  if (locations.size() != weights.size()) {
    throw std::invalid_argument("locations and weights have different lengths");
  }
  if (locations.empty()) {
    throw std::invalid_argument("empty mixture");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (!std::isfinite(locations[j])) {
      throw std::invalid_argument("mixture location must be finite");
    }
    if (!(weights[j] >= 0.0) || !std::isfinite(weights[j])) {
      throw std::invalid_argument("mixture weights must be nonnegative");
    }
    total += weights[j];
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("mixture weights sum to zero");
  }
  locations_.reserve(locations.size());
  weights_.reserve(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] > 0.0) {
      locations_.push_back(locations[j]);
      weights_.push_back(weights[j] / total);
    }
  }
}

double MixtureDistribution::pdf(double y) const {
  double f = 0.0;
  for (std::size_t j = 0; j < locations_.size(); ++j) {
    f += weights_[j] * kernel_density(kernel_, y - locations_[j]);
  }
  return f;
}

double MixtureDistribution::log_pdf(double y) const {
  // log-sum-exp over component log densities
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(locations_.size());
  for (std::size_t j = 0; j < locations_.size(); ++j) {
    terms[j] = std::log(weights_[j]) + kernel_log_density(kernel_, y - locations_[j]);
    max_term = std::max(max_term, terms[j]);
  }
  if (!std::isfinite(max_term)) return max_term;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  return max_term + std::log(acc);
}

double MixtureDistribution::cdf(double y) const {
  double p = 0.0;
  for (std::size_t j = 0; j < locations_.size(); ++j) {
    p += weights_[j] * kernel_cdf(kernel_, y - locations_[j]);
  }
  return std::min(std::max(p, 0.0), 1.0);
}

double MixtureDistribution::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("quantile level must be in (0, 1)");
  }
  // nu-dependent tail inflation for the initial bracket
  double s = 1.0;
  if (!kernel_.is_gaussian()) s = kernel_.nu <= 5.0 ? 10.0 : 4.0;
  const double pad = 50.0 * kernel_.h * s;
  double lo = *std::min_element(locations_.begin(), locations_.end()) - pad;
  double hi = *std::max_element(locations_.begin(), locations_.end()) + pad;

  int expansions = 0;
  while (cdf(lo) > alpha) {
    const double width = hi - lo;
    lo -= width;
    if (++expansions > 60) {
      throw std::runtime_error("quantile bracket expansion failed");
    }
  }
  while (cdf(hi) < alpha) {
    const double width = hi - lo;
    hi += width;
    if (++expansions > 60) {
      throw std::runtime_error("quantile bracket expansion failed");
    }
  }

  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval no longer representable
    (cdf(mid) < alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace easyuq
