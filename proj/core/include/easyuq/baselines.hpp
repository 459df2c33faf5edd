#ifndef EASYUQ_BASELINES_HPP
#define EASYUQ_BASELINES_HPP

#include <span>

#include "easyuq/types.hpp"

namespace easyuq {

// Reference method issuing a Gaussian centered at the model output with a
// constant standard deviation.
struct SingleGaussian {
  double sigma;

  // Single-component Gaussian mixture at location x, reusing the mixture
  // machinery for density, CDF, quantiles and scoring.
  MixtureDistribution predict(double x) const;
};

// sigma^2 = mean squared residual, the closed-form minimizer of the mean
// Gaussian log score at fixed means.  Throws when all residuals are zero.
SingleGaussian fit_single_gaussian(const TrainingData& data);

// Discrete CDF of an ensemble: unique member values weighted by their
// multiplicity.  Smoothing this with a tuned kernel gives the smoothed
// ensemble forecast.
StepCdf ensemble_step_cdf(std::span<const double> members);

}  // namespace easyuq

#endif  // EASYUQ_BASELINES_HPP
