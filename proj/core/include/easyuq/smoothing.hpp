#ifndef EASYUQ_SMOOTHING_HPP
#define EASYUQ_SMOOTHING_HPP

#include "easyuq/types.hpp"

namespace easyuq {

// Scaled kernel density K_h(u) = kappa_nu(u/h) / h, where kappa_nu is the
// standardized Student-t density (Gaussian for nu = infinity).
double kernel_density(const KernelSpec& spec, double u);
double kernel_log_density(const KernelSpec& spec, double u);

// CDF of the scaled kernel at u, i.e. the standardized kernel CDF
// evaluated at u/h.  Student-t via the regularized incomplete beta
// function, Gaussian via erfc.
double kernel_cdf(const KernelSpec& spec, double u);

// Kernel smoothing of a discrete predictive distribution: a mixture with
// the step CDF's point masses as weights and its thresholds as locations.
// Equivalent to convolving the step CDF with K_h.
MixtureDistribution smooth(const StepCdf& cdf, const KernelSpec& spec);

}  // namespace easyuq

#endif  // EASYUQ_SMOOTHING_HPP
