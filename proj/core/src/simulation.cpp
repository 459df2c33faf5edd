#include "easyuq/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "easyuq/detail/parallel.hpp"
#include "easyuq/idr.hpp"
#include "easyuq/smoothing.hpp"

namespace easyuq {

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::invalid_argument("gamma shape must be positive");
  }
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) {
    throw std::invalid_argument("empty range");
  }
  // rejection keeps the draw unbiased
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % n;
}

void Rng::shuffle(std::vector<std::size_t>& idx) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[below(i)]);
  }
}

namespace {

double sim_scale(double x) { return std::min(std::max(x, 2.0), 8.0); }

}  // namespace

TrainingData simulate_gamma(const GammaSimConfig& config) {
  if (config.n == 0) {
    throw std::invalid_argument("empty sample");
  }
  Rng rng(config.seed);
  std::vector<double> x(config.n), y(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    x[i] = rng.uniform(0.0, 10.0);
    y[i] = sim_scale(x[i]) * rng.gamma(std::sqrt(x[i]));
  }
  return TrainingData(std::move(x), std::move(y));
}

double gamma_true_cdf(double x, double y) {
  if (!(x > 0.0 && x < 10.0)) {
    throw std::invalid_argument("covariate outside (0, 10)");
  }
  if (y <= 0.0) return 0.0;
  return boost::math::gamma_p(std::sqrt(x), y / sim_scale(x));
}

double gamma_true_quantile(double x, double p) {
  if (!(x > 0.0 && x < 10.0)) {
    throw std::invalid_argument("covariate outside (0, 10)");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("quantile level must be in (0, 1)");
  }
  return sim_scale(x) * boost::math::gamma_p_inv(std::sqrt(x), p);
}

std::vector<ConsistencyRow> consistency_experiment(
    const ConsistencyConfig& config) {
  if (config.sizes.empty() || config.seeds.empty()) {
    throw std::invalid_argument("sizes and seeds must be nonempty");
  }
  if (config.x_points < 2 || config.y_points < 2) {
    throw std::invalid_argument("evaluation grid needs at least two points per axis");
  }

  struct Job {
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t n : config.sizes) {
    for (std::uint64_t seed : config.seeds) {
      jobs.push_back({n, seed});
    }
  }

  std::vector<ConsistencyRow> rows(jobs.size());
  detail::parallel_for(jobs.size(), config.threads, [&](std::size_t idx) {
    const auto& job = jobs[idx];
    const TrainingData data = simulate_gamma({job.n, job.seed});
    const IdrModel model = fit_idr(data);
    const double h =
        config.h_base * std::pow(static_cast<double>(job.n), -1.0 / 3.0);
    const KernelSpec spec = KernelSpec::gaussian(h);

    double sup_basic = 0.0, sup_smooth = 0.0;
    for (std::size_t ix = 0; ix < config.x_points; ++ix) {
      // interior covariate window; the estimate is unreliable at the edges
      const double x = 1.0 + 8.0 * static_cast<double>(ix) /
                                 static_cast<double>(config.x_points - 1);
      const StepCdf step = model.predict(x);
      const MixtureDistribution smoothed = smooth(step, spec);
      const double y_lo = gamma_true_quantile(x, 0.01);
      const double y_hi = gamma_true_quantile(x, 0.99);
      for (std::size_t iy = 0; iy < config.y_points; ++iy) {
        const double y = y_lo + (y_hi - y_lo) * static_cast<double>(iy) /
                                    static_cast<double>(config.y_points - 1);
        const double truth = gamma_true_cdf(x, y);
        sup_basic = std::max(sup_basic, std::abs(step.cdf(y) - truth));
        sup_smooth = std::max(sup_smooth, std::abs(smoothed.cdf(y) - truth));
      }
    }
    rows[idx] = {job.n, job.seed, sup_basic, sup_smooth};
  });
  return rows;
}

void write_training_csv(const std::string& path, const TrainingData& data) {
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("cannot open for writing: " + path);
  }
  out.precision(17);
  out << "x,y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.x()[i] << ',' << data.y()[i] << '\n';
  }
}

void write_consistency_csv(const std::string& path,
                           const std::vector<ConsistencyRow>& rows) {
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("cannot open for writing: " + path);
  }
  out.precision(17);
  out << "n,seed,sup_error_basic,sup_error_smooth\n";
  for (const auto& row : rows) {
    out << row.n << ',' << row.seed << ',' << row.sup_error_basic << ','
        << row.sup_error_smooth << '\n';
  }
}

}  // namespace easyuq
