#include "easyuq/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace easyuq {

MixtureDistribution SingleGaussian::predict(double x) const {
  return MixtureDistribution({x}, {1.0}, KernelSpec::gaussian(sigma));
}

SingleGaussian fit_single_gaussian(const TrainingData& data) {
  double ss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data.y()[i] - data.x()[i];
    ss += r * r;
  }
  const double variance = ss / static_cast<double>(data.size());
  if (!(variance > 0.0)) {
    throw std::invalid_argument("all residuals are zero");
  }
  return SingleGaussian{std::sqrt(variance)};
}

StepCdf ensemble_step_cdf(std::span<const double> members) {
  const ThresholdSet unique = unique_thresholds(members);
  auto thresholds = std::make_shared<const ThresholdSet>(unique);

  std::vector<double> cumulative(thresholds->size(), 0.0);
  for (double z : members) {
    cumulative[thresholds->index_of(z)] += 1.0;
  }
  double running = 0.0;
  const double k = static_cast<double>(members.size());
  for (auto& c : cumulative) {
    running += c / k;
    c = running;
  }
  cumulative.back() = 1.0;  // pin against accumulated rounding
  return StepCdf(std::move(thresholds), std::move(cumulative));
}

}  // namespace easyuq
