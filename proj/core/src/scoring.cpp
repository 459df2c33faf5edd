#include "easyuq/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "easyuq/smoothing.hpp"

namespace easyuq {

double crps(const StepCdf& cdf, double y) {
  const auto& t = cdf.thresholds().values();
  const auto w = cdf.point_masses();
  const std::size_t m = t.size();

  double e_abs = 0.0;  // E|X - y|
  for (std::size_t j = 0; j < m; ++j) {
    e_abs += w[j] * std::abs(t[j] - y);
  }
  // E|X - X'| over the sorted support via prefix sums
  double e_pair = 0.0;
  double prefix_w = 0.0, prefix_wt = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    e_pair += w[j] * (prefix_w * t[j] - prefix_wt);
    prefix_w += w[j];
    prefix_wt += w[j] * t[j];
  }
  return std::max(e_abs - e_pair, 0.0);
}

namespace {

// 15-point Kronrod rule with the embedded 7-point Gauss estimate
// (QUADPACK dqk15 constants), driven by an absolute error budget.
constexpr double kGkNode[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kGkWeight[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kGaussWeight[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
double gk15(const F& f, double a, double b, double& error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double kronrod = 0.0, gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double offset = half * kGkNode[i];
    const double pair =
        i == 7 ? f(center) : f(center - offset) + f(center + offset);
    kronrod += kGkWeight[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeight[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  error = std::abs(kronrod - gauss);
  return kronrod;
}

template <typename F>
double adaptive_gk15(const F& f, double a, double b, double abs_tol,
                     int depth) {
  double error = 0.0;
  const double estimate = gk15(f, a, b, error);
  if (error <= abs_tol || depth <= 0) return estimate;
  const double mid = 0.5 * (a + b);
  if (!(a < mid && mid < b)) return estimate;
  return adaptive_gk15(f, a, mid, 0.5 * abs_tol, depth - 1) +
         adaptive_gk15(f, mid, b, 0.5 * abs_tol, depth - 1);
}

// semi-infinite pieces via z = edge +- t / (1 - t)
template <typename F>
double upper_tail(const F& f, double edge, double abs_tol, int depth) {
  auto mapped = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double inv = 1.0 / (1.0 - t);
    return f(edge + t * inv) * inv * inv;
  };
  return adaptive_gk15(mapped, 0.0, 1.0, abs_tol, depth);
}

template <typename F>
double lower_tail(const F& f, double edge, double abs_tol, int depth) {
  auto mapped = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double inv = 1.0 / (1.0 - t);
    return f(edge - t * inv) * inv * inv;
  };
  return adaptive_gk15(mapped, 0.0, 1.0, abs_tol, depth);
}

// survival of the mixture, accurate in the far right tail
double mixture_survival(const MixtureDistribution& mix, double z) {
  double s = 0.0;
  for (std::size_t j = 0; j < mix.size(); ++j) {
    s += mix.weights()[j] * kernel_cdf(mix.kernel(), mix.locations()[j] - z);
  }
  return s;
}

}  // namespace

double crps(const MixtureDistribution& mix, double y) {
  if (!(mix.kernel().nu > 1.0)) {
    throw std::invalid_argument("CRPS undefined: infinite first moment");
  }

  // Breakpoints at component locations keep the scheme honest for spiky
  // (small h) mixtures; large mixtures are thinned to ~64 anchors.
  const auto& locs = mix.locations();
  std::vector<double> breaks;
  const std::size_t step = locs.size() <= 64 ? 1 : (locs.size() + 63) / 64;
  for (std::size_t j = 0; j < locs.size(); j += step) breaks.push_back(locs[j]);
  breaks.push_back(locs.back());
  breaks.push_back(y);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto below = [&](double z) {
    const double f = mix.cdf(z);
    return f * f;
  };
  auto above = [&](double z) {
    const double s = mixture_survival(mix, z);
    return s * s;
  };

  constexpr int kDepth = 45;
  const double piece_tol =
      0.8e-8 / static_cast<double>(breaks.size() + 1);
  double total = lower_tail(below, breaks.front(), 1e-9, kDepth);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const bool left_of_y = breaks[i + 1] <= y;
    total += left_of_y
                 ? adaptive_gk15(below, breaks[i], breaks[i + 1], piece_tol, kDepth)
                 : adaptive_gk15(above, breaks[i], breaks[i + 1], piece_tol, kDepth);
  }
  total += upper_tail(above, breaks.back(), 1e-9, kDepth);
  return total;
}

double log_score(const MixtureDistribution& mix, double y) {
  const double log_f = mix.log_pdf(y);
  if (log_f == -std::numeric_limits<double>::infinity()) {
    return std::numeric_limits<double>::infinity();
  }
  return -log_f;
}

ScoreReport mean_score(std::span<const double> scores) {
  if (scores.empty()) {
    throw std::invalid_argument("empty score collection");
  }
  ScoreReport report;
  report.per_case.assign(scores.begin(), scores.end());
  report.n_cases = scores.size();
  double sum = 0.0, carry = 0.0;  // Kahan; keeps the mean permutation-stable
  for (double s : scores) {
    if (std::isinf(s) && s > 0) ++report.n_infinite;
    const double adjusted = s - carry;
    const double next = sum + adjusted;
    carry = (next - sum) - adjusted;
    sum = next;
  }
  report.mean = report.n_infinite > 0 ? std::numeric_limits<double>::infinity()
                                      : sum / static_cast<double>(scores.size());
  return report;
}

}  // namespace easyuq
