#ifndef EASYUQ_PAV_HPP
#define EASYUQ_PAV_HPP

#include <span>
#include <vector>

namespace easyuq {

// Weighted least-squares regression under a nonincreasing constraint,
// solved by the pool-adjacent-violators algorithm.  Each output value is
// the weighted mean of a contiguous block of inputs; adjacent blocks are
// merged while the left mean is strictly below the right mean.
// Weights must be positive and values finite.  O(k) after an O(k) sweep.
std::vector<double> antitonic_fit(std::span<const double> values,
                                  std::span<const double> weights);

// Unit-weight convenience overload.
std::vector<double> antitonic_fit(std::span<const double> values);

// Brute-force reference: out[j] = min over k <= j of max over l >= j of
// the weighted block mean of values[k..l].  O(k^3); kept as an
// independent check of antitonic_fit, not for production use.
std::vector<double> minmax_fit(std::span<const double> values,
                               std::span<const double> weights);
std::vector<double> minmax_fit(std::span<const double> values);

}  // namespace easyuq

#endif  // EASYUQ_PAV_HPP
