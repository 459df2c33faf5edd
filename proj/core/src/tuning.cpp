#include "easyuq/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "easyuq/detail/parallel.hpp"
#include "easyuq/smoothing.hpp"

namespace easyuq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.9189385332046727;

// lgamma_r: std::lgamma writes the global signgam and is not thread safe
double student_log_const(double nu) {
  int sign = 0;
  return ::lgamma_r(0.5 * (nu + 1.0), &sign) - ::lgamma_r(0.5 * nu, &sign) -
         0.5 * std::log(nu * M_PI);
}

// per-spec values hoisted out of the per-case scoring loop
struct SpecConstants {
  bool gauss;
  double inv_h;
  double nu;
  double half_nup1;
  double log_norm;

  explicit SpecConstants(const KernelSpec& spec)
      : gauss(spec.is_gaussian()),
        inv_h(1.0 / spec.h),
        nu(spec.nu),
        half_nup1(0.5 * (spec.nu + 1.0)),
        log_norm((gauss ? -kLogSqrt2Pi : student_log_const(spec.nu)) -
                 std::log(spec.h)) {}
};

// One-fit state shared across bandwidth evaluations: for every training
// case, the sparse support of its predictive distribution with the mass
// at the case's own outcome removed and the rest rescaled.  Building this
// once makes a criterion evaluation linear in the stored components.
class OneFitEvaluator {
 public:
  OneFitEvaluator(const IdrModel& model, const TrainingData& data, Score score)
      : score_(score) {
    const auto& thresholds = model.thresholds();
    const std::size_t k = model.k();

    // sparse nonzero masses per model row
    std::vector<std::vector<std::pair<std::size_t, double>>> row_masses(k);
    for (std::size_t r = 0; r < k; ++r) {
      auto cum = model.row(r);
      double prev = 0.0;
      for (std::size_t j = 0; j < cum.size(); ++j) {
        const double w = cum[j] - prev;
        prev = cum[j];
        if (w > 0.0) row_masses[r].emplace_back(j, w);
      }
    }

    const std::size_t n = data.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = model.row_index_of(data.x()[i]);
      if (r == k) {
        throw std::invalid_argument("model was not fitted on this data");
      }
      const std::size_t j = thresholds.index_of(data.y()[i]);
      if (j == thresholds.size()) {
        throw std::invalid_argument("model was not fitted on this data");
      }
      double held_out = 0.0;
      for (const auto& [idx, w] : row_masses[r]) {
        if (idx == j) {
          held_out = w;
          break;
        }
      }
      const double remaining = 1.0 - held_out;
      if (!(remaining > 0.0)) {
        ++skipped_;
        continue;
      }
      Case c;
      c.offset = component_delta_.size();
      c.y = data.y()[i];
      for (const auto& [idx, w] : row_masses[r]) {
        if (idx == j) continue;
        component_delta_.push_back(c.y - thresholds[idx]);
        component_loc_.push_back(thresholds[idx]);
        component_w_.push_back(w / remaining);
      }
      c.count = component_delta_.size() - c.offset;
      cases_.push_back(c);
    }
    if (cases_.empty()) {
      throw std::runtime_error("one-fit criterion undefined");
    }
  }

  std::size_t skipped() const { return skipped_; }

  double operator()(const KernelSpec& spec) const {
    const SpecConstants k(spec);
    double sum = 0.0, carry = 0.0;
    for (const auto& c : cases_) {
      const double s = score_ == Score::logs ? case_log_score(c, k)
                                             : case_crps(c, spec);
      if (s == kInf) return kInf;
      const double adjusted = s - carry;
      const double next = sum + adjusted;
      carry = (next - sum) - adjusted;
      sum = next;
    }
    return sum / static_cast<double>(cases_.size());
  }

 private:
  struct Case {
    std::size_t offset = 0;
    std::size_t count = 0;
    double y = 0.0;
  };

  double case_log_score(const Case& c, const SpecConstants& k) const {
    double f = 0.0;
    for (std::size_t l = c.offset; l < c.offset + c.count; ++l) {
      const double z = component_delta_[l] * k.inv_h;
      f += k.gauss
               ? component_w_[l] * std::exp(-0.5 * z * z)
               : component_w_[l] * std::exp(-k.half_nup1 * std::log1p(z * z / k.nu));
    }
    if (f > 0.0 && std::isfinite(f)) {
      return -(std::log(f) + k.log_norm);
    }
    // underflow: redo the sum as log-sum-exp
    double max_term = -kInf;
    for (std::size_t l = c.offset; l < c.offset + c.count; ++l) {
      const double z = component_delta_[l] * k.inv_h;
      const double lk =
          k.gauss ? -0.5 * z * z : -k.half_nup1 * std::log1p(z * z / k.nu);
      max_term = std::max(max_term, std::log(component_w_[l]) + lk);
    }
    if (max_term == -kInf) return kInf;
    double acc = 0.0;
    for (std::size_t l = c.offset; l < c.offset + c.count; ++l) {
      const double z = component_delta_[l] * k.inv_h;
      const double lk =
          k.gauss ? -0.5 * z * z : -k.half_nup1 * std::log1p(z * z / k.nu);
      acc += std::exp(std::log(component_w_[l]) + lk - max_term);
    }
    return -(max_term + std::log(acc) + k.log_norm);
  }

  double case_crps(const Case& c, const KernelSpec& spec) const {
    std::vector<double> locs(component_loc_.begin() + c.offset,
                             component_loc_.begin() + c.offset + c.count);
    std::vector<double> w(component_w_.begin() + c.offset,
                          component_w_.begin() + c.offset + c.count);
    return crps(MixtureDistribution(std::move(locs), std::move(w), spec), c.y);
  }

  Score score_;
  std::vector<Case> cases_;
  std::vector<double> component_delta_;
  std::vector<double> component_loc_;
  std::vector<double> component_w_;
  std::size_t skipped_ = 0;
};

double outcome_range(const TrainingData& data) {
  auto [lo, hi] = std::minmax_element(data.y().begin(), data.y().end());
  return *hi - *lo;
}

NuSearchRow search_bandwidth(const OneFitEvaluator& evaluator, double nu,
                             double h_floor, double h_ceiling) {
  auto objective = [&](double t) {
    return evaluator(KernelSpec(nu, std::exp(t)));
  };
  const auto result = brent_minimize(objective, std::log(h_floor),
                                     std::log(h_ceiling), 1e-3);
  return {nu, std::exp(result.argmin), result.value};
}

TuningResult pick_best(std::vector<NuSearchRow> rows, std::size_t skipped) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].criterion < rows[best].criterion) best = i;
  }
  TuningResult result{KernelSpec(rows[best].nu, rows[best].h),
                      rows[best].criterion, std::move(rows), false, skipped};
  return result;
}

}  // namespace

BrentResult brent_minimize(const std::function<double(double)>& f, double lo,
                           double hi, double tol) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw std::invalid_argument("invalid minimization bracket");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("tolerance must be positive");
  }
  constexpr double golden = 0.3819660112501051;  // (3 - sqrt(5)) / 2
  const double eps = std::sqrt(std::numeric_limits<double>::epsilon());

  double a = lo, b = hi;
  double x = a + golden * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int evals = 1;

  for (int iter = 0; iter < 200; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = eps * std::abs(x) + tol;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;

    double p = 0.0, q = 0.0, r = 0.0;
    if (std::abs(e) > tol1) {
      // parabola through (v, fv), (w, fw), (x, fx)
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      r = e;
      e = d;
    }
    double u;
    if (std::abs(p) < std::abs(0.5 * q * r) && p > q * (a - x) &&
        p < q * (b - x)) {
      d = p / q;
      u = x + d;
      if (u - a < tol2 || b - u < tol2) d = x < m ? tol1 : -tol1;
    } else {
      e = (x < m ? b : a) - x;
      d = golden * e;
    }
    u = x + (std::abs(d) >= tol1 ? d : (d > 0.0 ? tol1 : -tol1));
    const double fu = f(u);
    ++evals;

    if (fu <= fx) {
      (u < x ? b : a) = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evals};
}

double one_fit_criterion(const IdrModel& model, const TrainingData& data,
                         const KernelSpec& spec, Score score,
                         std::size_t* skipped) {
  OneFitEvaluator evaluator(model, data, score);
  if (skipped) *skipped = evaluator.skipped();
  return evaluator(spec);
}

double loo_cv_criterion(const TrainingData& data, const KernelSpec& spec,
                        Score score) {
  const std::size_t n = data.size();
  if (n < 2) {
    throw std::invalid_argument("leave-one-out requires at least two cases");
  }
  double sum = 0.0, carry = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x, y;
    x.reserve(n - 1);
    y.reserve(n - 1);
    for (std::size_t l = 0; l < n; ++l) {
      if (l == i) continue;
      x.push_back(data.x()[l]);
      y.push_back(data.y()[l]);
    }
    const IdrModel refit = fit_idr(TrainingData(std::move(x), std::move(y)));
    const MixtureDistribution held_out =
        smooth(refit.predict(data.x()[i]), spec);
    const double s = score == Score::logs ? log_score(held_out, data.y()[i])
                                          : crps(held_out, data.y()[i]);
    if (s == kInf) return kInf;
    const double adjusted = s - carry;
    const double next = sum + adjusted;
    carry = (next - sum) - adjusted;
    sum = next;
  }
  return sum / static_cast<double>(n);
}

double bandwidth_floor(const TrainingData& data) {
  const double range = outcome_range(data);
  if (!(range > 0.0)) {
    throw std::runtime_error("one-fit criterion undefined");
  }
  return 1e-4 * range;
}

double bandwidth_ceiling(const TrainingData& data) {
  const double range = outcome_range(data);
  if (!(range > 0.0)) {
    throw std::runtime_error("one-fit criterion undefined");
  }
  return range;
}

TuningResult one_fit_grid_search(const IdrModel& model,
                                 const TrainingData& data, Score score,
                                 unsigned threads) {
  const double h_floor = bandwidth_floor(data);
  const double h_ceiling = bandwidth_ceiling(data);
  const OneFitEvaluator evaluator(model, data, score);

  const auto grid = kernel_nu_grid();
  std::vector<NuSearchRow> rows(grid.size());
  detail::parallel_for(grid.size(), threads, [&](std::size_t i) {
    rows[i] = search_bandwidth(evaluator, grid[i], h_floor, h_ceiling);
  });
  return pick_best(std::move(rows), evaluator.skipped());
}

TuningResult moderated_grid_search(const IdrModel& model,
                                   const TrainingData& data, Score score,
                                   unsigned threads) {
  const double h_floor = bandwidth_floor(data);
  const double h_ceiling = bandwidth_ceiling(data);
  const OneFitEvaluator evaluator(model, data, score);
  const double degeneration_floor = 10.0 * h_floor;

  // probe the heavy-tail and Gaussian ends of the grid first
  const double probes[] = {2.0, std::numeric_limits<double>::infinity()};
  std::vector<NuSearchRow> probe_rows(2);
  detail::parallel_for(2, threads, [&](std::size_t i) {
    probe_rows[i] = search_bandwidth(evaluator, probes[i], h_floor, h_ceiling);
  });

  if (probe_rows[0].h < degeneration_floor ||
      probe_rows[1].h < degeneration_floor) {
    const KernelSpec fallback =
        KernelSpec::gaussian(silverman_bandwidth(data.y()));
    TuningResult result{fallback, evaluator(fallback), std::move(probe_rows),
                        true, evaluator.skipped()};
    return result;
  }

  const double rest[] = {3.0, 4.0, 5.0, 10.0, 20.0};
  std::vector<NuSearchRow> rest_rows(5);
  detail::parallel_for(5, threads, [&](std::size_t i) {
    rest_rows[i] = search_bandwidth(evaluator, rest[i], h_floor, h_ceiling);
  });

  // reassemble in grid order: 2, 3, 4, 5, 10, 20, inf
  std::vector<NuSearchRow> rows;
  rows.push_back(probe_rows[0]);
  rows.insert(rows.end(), rest_rows.begin(), rest_rows.end());
  rows.push_back(probe_rows[1]);
  return pick_best(std::move(rows), evaluator.skipped());
}

double silverman_bandwidth(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 2) {
    throw std::invalid_argument("Silverman's rule requires at least two values");
  }
  double mean = 0.0;
  for (double v : sample) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile7 = [&](double p) {
    const double pos = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  };
  const double iqr = quantile7(0.75) - quantile7(0.25);

  double spread = std::min(sd, iqr / 1.34);
  if (spread == 0.0) spread = sd;  // heavy ties can zero the IQR
  if (!(spread > 0.0)) {
    throw std::invalid_argument("degenerate sample");
  }
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

}  // namespace easyuq
