#ifndef EASYUQ_SCORING_HPP
#define EASYUQ_SCORING_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "easyuq/types.hpp"

namespace easyuq {

enum class Score { logs, crps };

struct ScoreReport {
  double mean = 0.0;
  std::vector<double> per_case;
  std::size_t n_cases = 0;
  std::size_t n_infinite = 0;  // cases whose score is +infinity
};

// Continuous ranked probability score of a step CDF, via the energy form
//   sum_j w_j |t_j - y|  -  0.5 sum_{j,l} w_j w_l |t_j - t_l|
// computed with prefix sums over the sorted thresholds.  Exact and
// nonnegative; reduces to |t - y| for a point mass.
double crps(const StepCdf& cdf, double y);

// CRPS of a kernel mixture by adaptive Gauss-Kronrod quadrature of the
// squared CDF distance, to 1e-8 absolute.  Requires a kernel with finite
// first moment (nu > 1).
double crps(const MixtureDistribution& mix, double y);

// Logarithmic score -log f(y), with the mixture density evaluated by
// log-sum-exp over component log densities.  Returns +infinity when the
// density underflows to zero.
double log_score(const MixtureDistribution& mix, double y);

// Arithmetic mean over a nonempty score collection; +infinity propagates.
ScoreReport mean_score(std::span<const double> scores);

}  // namespace easyuq

#endif  // EASYUQ_SCORING_HPP
