#include "easyuq/pav.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "easyuq/detail/pav_impl.hpp"

namespace easyuq {

namespace {

void check_input(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) {
    throw std::invalid_argument("empty sample");
  }
  if (values.size() != weights.size()) {
    throw std::invalid_argument("values and weights have different lengths");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument("values must be finite");
    }
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw std::invalid_argument("weights must be positive and finite");
    }
  }
}

}  // namespace

std::vector<double> antitonic_fit(std::span<const double> values,
                                  std::span<const double> weights) {
  check_input(values, weights);
  std::vector<double> out(values.size());
  detail::PavWorkspace ws;
  detail::antitonic_fit_into(values, weights, ws, out.data(), 1);
  return out;
}

std::vector<double> antitonic_fit(std::span<const double> values) {
  std::vector<double> unit(values.size(), 1.0);
  return antitonic_fit(values, unit);
}

std::vector<double> minmax_fit(std::span<const double> values,
                               std::span<const double> weights) {
  check_input(values, weights);
  const std::size_t k = values.size();
  // prefix sums of w and w*v, so a block mean is a two-subtraction ratio
  std::vector<double> pw(k + 1, 0.0), pwv(k + 1, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    pw[i + 1] = pw[i] + weights[i];
    pwv[i + 1] = pwv[i] + weights[i] * values[i];
  }
  auto block_mean = [&](std::size_t a, std::size_t b) {  // inclusive a..b
    return (pwv[b + 1] - pwv[a]) / (pw[b + 1] - pw[a]);
  };
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a <= j; ++a) {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t b = j; b < k; ++b) {
        worst = std::max(worst, block_mean(a, b));
      }
      best = std::min(best, worst);
    }
    out[j] = best;
  }
  return out;
}

std::vector<double> minmax_fit(std::span<const double> values) {
  std::vector<double> unit(values.size(), 1.0);
  return minmax_fit(values, unit);
}

}  // namespace easyuq
