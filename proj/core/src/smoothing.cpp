#include "easyuq/smoothing.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

namespace easyuq {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log sqrt(2 pi)

// lgamma_r: std::lgamma writes the global signgam and is not thread safe
double log_gamma(double v) {
  int sign = 0;
  return ::lgamma_r(v, &sign);
}

// log of the standardized Student-t normalizing constant
double student_log_const(double nu) {
  return log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI);
}

}  // namespace

double kernel_log_density(const KernelSpec& spec, double u) {
  const double z = u / spec.h;
  if (spec.is_gaussian()) {
    return -0.5 * z * z - kLogSqrt2Pi - std::log(spec.h);
  }
  return student_log_const(spec.nu) -
         0.5 * (spec.nu + 1.0) * std::log1p(z * z / spec.nu) - std::log(spec.h);
}

double kernel_density(const KernelSpec& spec, double u) {
  return std::exp(kernel_log_density(spec, u));
}

namespace {

// Student-t CDF.  For integer degrees of freedom the regularized
// incomplete beta function I_x(nu/2, 1/2) reduces to an elementary finite
// sum, which is far cheaper than the general-purpose evaluation and keeps
// quadrature-heavy scoring fast.  Accuracy is absolute ~1e-15 either way.
double student_cdf(double nu, double z) {
  const double nu_int = std::floor(nu);
  if (nu == nu_int && nu <= 64.0) {
    const double x = nu / (nu + z * z);
    const double s = z / std::sqrt(nu + z * z);
    if (static_cast<long>(nu_int) % 2 == 0) {
      double coeff = 1.0, sum = 1.0, xpow = 1.0;
      const long terms = static_cast<long>(nu_int) / 2;
      for (long j = 1; j < terms; ++j) {
        coeff *= (2.0 * j - 1.0) / (2.0 * j);
        xpow *= x;
        sum += coeff * xpow;
      }
      return 0.5 + 0.5 * s * sum;
    }
    double coeff = 1.0, sum = 1.0, xpow = 1.0;
    const long terms = (static_cast<long>(nu_int) - 1) / 2;
    for (long j = 1; j < terms; ++j) {
      coeff *= (2.0 * j) / (2.0 * j + 1.0);
      xpow *= x;
      sum += coeff * xpow;
    }
    const double arc = std::atan2(z, std::sqrt(nu));
    const double wedge = nu_int == 1.0 ? 0.0 : s * std::sqrt(x) * sum;
    return 0.5 + (arc + wedge) / M_PI;
  }
  const boost::math::students_t dist(nu);
  return boost::math::cdf(dist, z);
}

}  // namespace

double kernel_cdf(const KernelSpec& spec, double u) {
  const double z = u / spec.h;
  if (spec.is_gaussian()) {
    return 0.5 * std::erfc(-z * M_SQRT1_2);
  }
  return student_cdf(spec.nu, z);
}

MixtureDistribution smooth(const StepCdf& cdf, const KernelSpec& spec) {
  return MixtureDistribution(cdf.thresholds().values(), cdf.point_masses(),
                             spec);
}

}  // namespace easyuq
