#ifndef EASYUQ_TUNING_HPP
#define EASYUQ_TUNING_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "easyuq/idr.hpp"
#include "easyuq/scoring.hpp"
#include "easyuq/types.hpp"

namespace easyuq {

struct BrentResult {
  double argmin = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

// Brent's method (golden section plus successive parabolic interpolation)
// for a scalar minimum on [lo, hi].  Deterministic; +infinity function
// values are tolerated and treated as large.
BrentResult brent_minimize(const std::function<double(double)>& f, double lo,
                           double hi, double tol);

struct NuSearchRow {
  double nu = 0.0;
  double h = 0.0;
  double criterion = 0.0;
};

struct TuningResult {
  KernelSpec best;
  double criterion_value = 0.0;
  std::vector<NuSearchRow> per_nu;
  bool fallback_used = false;
  std::size_t skipped_cases = 0;  // degenerate cases at the best spec
};

// One-fit criterion: the model is fitted once; for each training case the
// point mass at the case's own outcome value is removed from its
// predictive distribution, the remaining weights are rescaled, the result
// is smoothed with `spec`, and the outcome is scored.  Cases whose removal
// leaves zero mass are skipped; their count is written to *skipped when
// given.  Throws if every case is degenerate.
double one_fit_criterion(const IdrModel& model, const TrainingData& data,
                         const KernelSpec& spec, Score score = Score::logs,
                         std::size_t* skipped = nullptr);

// Leave-one-out cross-validation: refits the model n times, smoothing the
// held-out prediction with `spec` and scoring the held-out outcome.
// O(n) full refits; intended for small n.
double loo_cv_criterion(const TrainingData& data, const KernelSpec& spec,
                        Score score = Score::logs);

// Bandwidth search bracket [h_floor, h_ceil] derived from the outcome
// range; the search runs on log h.
double bandwidth_floor(const TrainingData& data);
double bandwidth_ceiling(const TrainingData& data);

// Minimizes the one-fit criterion over h for every nu in the kernel grid
// and returns the (nu, h) pair with the smallest criterion value.
TuningResult one_fit_grid_search(const IdrModel& model,
                                 const TrainingData& data,
                                 Score score = Score::logs,
                                 unsigned threads = 0);

// Grid search with a degeneration guard: probes nu = 2 and the Gaussian
// kernel first, and if either optimal bandwidth collapses to the bracket
// floor returns a Gaussian kernel with Silverman's rule-of-thumb
// bandwidth (fallback_used = true) instead of searching further.
TuningResult moderated_grid_search(const IdrModel& model,
                                   const TrainingData& data,
                                   Score score = Score::logs,
                                   unsigned threads = 0);

// Silverman's rule of thumb, h = 0.9 min(sd, IQR/1.34) n^{-1/5}.
// Falls back to the standard deviation when the IQR is zero; throws on a
// degenerate (zero spread) sample.
double silverman_bandwidth(std::span<const double> sample);

}  // namespace easyuq

#endif  // EASYUQ_TUNING_HPP
