#ifndef EASYUQ_SIMULATION_HPP
#define EASYUQ_SIMULATION_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "easyuq/types.hpp"

namespace easyuq {

// Seeded random source with fully specified output sequences: the engine
// is std::mt19937_64 (pinned by the C++ standard) and every distribution
// below is implemented here rather than delegated to the standard
// library, so samples are reproducible per seed across compilers.
//   uniform:  ((engine() >> 11) + 0.5) * 2^-53, strictly inside (0,1)
//   normal:   Box-Muller, sqrt(-2 ln u1) * cos(2 pi u2)
//   gamma:    Marsaglia-Tsang squeeze for shape >= 1; for shape < 1 the
//             boost G(a) = G(a+1) * U^{1/a}
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                      // (0, 1)
  double uniform(double a, double b);    // (a, b)
  double normal();
  double gamma(double shape);            // scale 1
  std::uint64_t below(std::uint64_t n);  // uniform on {0, ..., n-1}
  void shuffle(std::vector<std::size_t>& idx);  // Fisher-Yates

 private:
  std::mt19937_64 engine_;
};

struct GammaSimConfig {
  std::size_t n = 500;
  std::uint64_t seed = 1;
};

// Synthetic model output-outcome pairs: X uniform on (0, 10) and
// Y | X ~ Gamma(shape = sqrt(X), scale = clamp(X, 2, 8)).
TrainingData simulate_gamma(const GammaSimConfig& config);

// True conditional CDF of the simulation model, via the regularized lower
// incomplete gamma function.  Requires x in (0, 10); returns 0 for y <= 0.
double gamma_true_cdf(double x, double y);

// Inverse of gamma_true_cdf in y, for evaluation grids.
double gamma_true_quantile(double x, double p);

struct ConsistencyRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double sup_error_basic = 0.0;
  double sup_error_smooth = 0.0;
};

struct ConsistencyConfig {
  std::vector<std::size_t> sizes;
  std::vector<std::uint64_t> seeds;
  double h_base = 2.0;          // bandwidth h_base * n^{-1/3}
  std::size_t x_points = 33;    // grid over the interior (1, 9)
  std::size_t y_points = 65;    // grid over the 0.01..0.99 true quantiles
  unsigned threads = 0;
};

// For each (n, seed): simulate, fit, smooth with a Gaussian kernel of
// bandwidth h_base * n^{-1/3}, and record the sup distance to the true
// conditional CDF over the interior grid, for both the step and the
// smoothed estimate.
std::vector<ConsistencyRow> consistency_experiment(
    const ConsistencyConfig& config);

// CSV export (columns x,y and n,seed,sup_error_basic,sup_error_smooth).
void write_training_csv(const std::string& path, const TrainingData& data);
void write_consistency_csv(const std::string& path,
                           const std::vector<ConsistencyRow>& rows);

}  // namespace easyuq

#endif  // EASYUQ_SIMULATION_HPP
