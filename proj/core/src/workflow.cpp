#include "easyuq/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "easyuq/detail/parallel.hpp"
#include "easyuq/idr.hpp"
#include "easyuq/simulation.hpp"
#include "easyuq/smoothing.hpp"
#include "easyuq/tuning.hpp"

namespace easyuq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class IdentityPredictor final : public PointPredictor {
 public:
  void fit(const FeatureMatrix& features, std::span<const double>,
           const Hyperparams&) override {
    if (!features.empty() && features.front().size() != 1) {
      throw std::invalid_argument("identity predictor needs exactly one feature");
    }
  }
  std::vector<double> predict(const FeatureMatrix& features) const override {
    std::vector<double> out;
    out.reserve(features.size());
    for (const auto& row : features) {
      if (row.size() != 1) {
        throw std::invalid_argument("identity predictor needs exactly one feature");
      }
      out.push_back(row[0]);
    }
    return out;
  }
  std::string name() const override { return "identity"; }
};

class LeastSquaresPredictor final : public PointPredictor {
 public:
  void fit(const FeatureMatrix& features, std::span<const double> y,
           const Hyperparams& hp) override {
    const std::size_t n = features.size();
    if (n == 0 || n != y.size()) {
      throw std::invalid_argument("least squares: empty or mismatched data");
    }
    const std::size_t d = features.front().size() + 1;  // intercept first
    double ridge = 0.0;
    if (auto it = hp.find("ridge"); it != hp.end()) ridge = it->second;

    // normal equations with a Cholesky solve
    std::vector<double> xtx(d * d, 0.0), xty(d, 0.0);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
      row[0] = 1.0;
      for (std::size_t c = 1; c < d; ++c) row[c] = features[i][c - 1];
      for (std::size_t a = 0; a < d; ++a) {
        xty[a] += row[a] * y[i];
        for (std::size_t b = 0; b <= a; ++b) xtx[a * d + b] += row[a] * row[b];
      }
    }
    double trace = 0.0;
    for (std::size_t a = 0; a < d; ++a) trace += xtx[a * d + a];
    for (std::size_t a = 1; a < d; ++a) xtx[a * d + a] += ridge;

    double jitter = 1e-12 * (1.0 + trace / static_cast<double>(d));
    for (int attempt = 0; attempt < 6; ++attempt) {
      auto chol = xtx;
      for (std::size_t a = 0; a < d; ++a) chol[a * d + a] += jitter;
      if (cholesky_solve(chol, xty, d)) {
        coef_ = xty_solution_;
        return;
      }
      jitter *= 100.0;
    }
    throw std::runtime_error("least squares: singular normal equations");
  }

  std::vector<double> predict(const FeatureMatrix& features) const override {
    std::vector<double> out;
    out.reserve(features.size());
    for (const auto& row : features) {
      if (row.size() + 1 != coef_.size()) {
        throw std::invalid_argument("least squares: wrong feature count");
      }
      double z = coef_[0];
      for (std::size_t c = 0; c < row.size(); ++c) z += coef_[c + 1] * row[c];
      out.push_back(z);
    }
    return out;
  }
  std::string name() const override { return "least_squares"; }

 private:
  bool cholesky_solve(std::vector<double>& a, const std::vector<double>& b,
                      std::size_t d) {
    // lower-triangular factor in place, then two substitutions
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = a[i * d + j];
        for (std::size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
        if (i == j) {
          if (!(s > 0.0)) return false;
          a[i * d + i] = std::sqrt(s);
        } else {
          a[i * d + j] = s / a[j * d + j];
        }
      }
    }
    std::vector<double> z(d);
    for (std::size_t i = 0; i < d; ++i) {
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= a[i * d + k] * z[k];
      z[i] = s / a[i * d + i];
    }
    xty_solution_.assign(d, 0.0);
    for (std::size_t ii = d; ii-- > 0;) {
      double s = z[ii];
      for (std::size_t k = ii + 1; k < d; ++k) {
        s -= a[k * d + ii] * xty_solution_[k];
      }
      xty_solution_[ii] = s / a[ii * d + ii];
    }
    return true;
  }

  std::vector<double> coef_;
  std::vector<double> xty_solution_;
};

class KnnPredictor final : public PointPredictor {
 public:
  void fit(const FeatureMatrix& features, std::span<const double> y,
           const Hyperparams& hp) override {
    if (features.empty() || features.size() != y.size()) {
      throw std::invalid_argument("knn: empty or mismatched data");
    }
    train_x_ = features;
    train_y_.assign(y.begin(), y.end());
    double k = 5.0;
    if (auto it = hp.find("k"); it != hp.end()) k = it->second;
    k_ = static_cast<std::size_t>(std::llround(k));
    k_ = std::clamp<std::size_t>(k_, 1, train_y_.size());
  }

  std::vector<double> predict(const FeatureMatrix& features) const override {
    std::vector<double> out;
    out.reserve(features.size());
    std::vector<std::pair<double, std::size_t>> dist(train_x_.size());
    for (const auto& q : features) {
      for (std::size_t i = 0; i < train_x_.size(); ++i) {
        if (q.size() != train_x_[i].size()) {
          throw std::invalid_argument("knn: wrong feature count");
        }
        double ss = 0.0;
        for (std::size_t c = 0; c < q.size(); ++c) {
          const double diff = q[c] - train_x_[i][c];
          ss += diff * diff;
        }
        dist[i] = {ss, i};
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k_),
                        dist.end());
      double mean = 0.0;
      for (std::size_t i = 0; i < k_; ++i) mean += train_y_[dist[i].second];
      out.push_back(mean / static_cast<double>(k_));
    }
    return out;
  }
  std::string name() const override { return "knn"; }

 private:
  FeatureMatrix train_x_;
  std::vector<double> train_y_;
  std::size_t k_ = 5;
};

FeatureMatrix gather_features(const Dataset& data,
                              std::span<const std::size_t> idx) {
  FeatureMatrix out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data.features[i]);
  return out;
}

std::vector<double> gather_outcomes(const Dataset& data,
                                    std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data.outcomes[i]);
  return out;
}

double mean_or_inf(std::span<const double> scores) {
  return mean_score(scores).mean;
}

}  // namespace

PredictorFactory make_predictor_factory(const std::string& name) {
  if (name == "identity") {
    return [] { return std::make_unique<IdentityPredictor>(); };
  }
  if (name == "least_squares") {
    return [] { return std::make_unique<LeastSquaresPredictor>(); };
  }
  if (name == "knn") {
    return [] { return std::make_unique<KnnPredictor>(); };
  }
  throw std::invalid_argument("unknown predictor '" + name + "'");
}

SplitIndices make_split(std::size_t n, const SplitPlan& plan,
                        std::size_t split_index) {
  if (!(plan.train_fraction > 0.0 && plan.validation_fraction > 0.0 &&
        plan.train_fraction + plan.validation_fraction < 1.0)) {
    throw std::invalid_argument("split fractions must be positive and sum below 1");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(plan.seed + 0x9E3779B97F4A7C15ull * (split_index + 1));
  rng.shuffle(idx);

  const auto n_train =
      static_cast<std::size_t>(plan.train_fraction * static_cast<double>(n));
  const auto n_val = static_cast<std::size_t>(plan.validation_fraction *
                                              static_cast<double>(n));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw std::invalid_argument("dataset too small to split");
  }
  SplitIndices split;
  split.train.assign(idx.begin(), idx.begin() + static_cast<long>(n_train));
  split.validation.assign(idx.begin() + static_cast<long>(n_train),
                          idx.begin() + static_cast<long>(n_train + n_val));
  split.test.assign(idx.begin() + static_cast<long>(n_train + n_val), idx.end());
  return split;
}

WorkflowReport run_workflow(const Dataset& dataset,
                            const PredictorFactory& factory,
                            const std::vector<Hyperparams>& hypergrid,
                            const SplitPlan& plan,
                            const WorkflowConfig& config) {
  if (dataset.size() == 0) {
    throw std::invalid_argument("empty sample");
  }
  if (dataset.features.size() != dataset.size()) {
    throw std::invalid_argument("feature and outcome counts differ");
  }
  if (hypergrid.empty()) {
    throw std::invalid_argument("empty hyperparameter grid");
  }
  if (plan.n_splits == 0) {
    throw std::invalid_argument("need at least one split");
  }

  WorkflowReport report;
  report.smoothed = config.smooth;
  report.splits.resize(plan.n_splits);

  // outer parallelism across splits; tuning then runs single threaded
  const bool outer_parallel = plan.n_splits > 1 && config.threads != 1;
  const unsigned inner_threads = outer_parallel ? 1 : config.threads;

  detail::parallel_for(plan.n_splits, config.threads, [&](std::size_t s) {
    SplitRecord& rec = report.splits[s];
    rec.split_index = s;
    rec.test_logs = kNaN;
    rec.test_crps = kNaN;
    try {
      rec.indices = make_split(dataset.size(), plan, s);
      const auto train_x = gather_features(dataset, rec.indices.train);
      const auto train_y = gather_outcomes(dataset, rec.indices.train);
      const auto val_x = gather_features(dataset, rec.indices.validation);
      const auto val_y = gather_outcomes(dataset, rec.indices.validation);

      for (const auto& hp : hypergrid) {
        auto predictor = factory();
        predictor->fit(train_x, train_y, hp);
        const TrainingData train_pairs(predictor->predict(train_x), train_y);
        const IdrModel model = fit_idr(train_pairs);
        const auto z_val = predictor->predict(val_x);

        HyperTrial trial;
        trial.hp = hp;
        std::vector<double> scores(val_y.size());
        if (config.smooth) {
          const TuningResult tuned = moderated_grid_search(
              model, train_pairs, Score::logs, inner_threads);
          trial.nu = tuned.best.nu;
          trial.h = tuned.best.h;
          trial.fallback_used = tuned.fallback_used;
          const KernelSpec spec = tuned.best;
          for (std::size_t i = 0; i < val_y.size(); ++i) {
            scores[i] = log_score(smooth(model.predict(z_val[i]), spec), val_y[i]);
          }
        } else {
          for (std::size_t i = 0; i < val_y.size(); ++i) {
            scores[i] = crps(model.predict(z_val[i]), val_y[i]);
          }
        }
        trial.validation_score = mean_or_inf(scores);
        rec.trials.push_back(std::move(trial));
      }

      rec.selected = 0;
      for (std::size_t t = 1; t < rec.trials.size(); ++t) {
        if (rec.trials[t].validation_score <
            rec.trials[rec.selected].validation_score) {
          rec.selected = t;
        }
      }
      const HyperTrial& best = rec.trials[rec.selected];

      // re-learn on train plus validation with the selected setting
      std::vector<std::size_t> refit_idx = rec.indices.train;
      refit_idx.insert(refit_idx.end(), rec.indices.validation.begin(),
                       rec.indices.validation.end());
      const auto refit_x = gather_features(dataset, refit_idx);
      const auto refit_y = gather_outcomes(dataset, refit_idx);
      auto predictor = factory();
      predictor->fit(refit_x, refit_y, best.hp);
      const IdrModel refit_model =
          fit_idr(TrainingData(predictor->predict(refit_x), refit_y));

      const auto test_x = gather_features(dataset, rec.indices.test);
      const auto test_y = gather_outcomes(dataset, rec.indices.test);
      const auto z_test = predictor->predict(test_x);

      std::vector<double> crps_scores(test_y.size());
      if (config.smooth) {
        const KernelSpec spec(best.nu, best.h);
        std::vector<double> logs_scores(test_y.size());
        for (std::size_t i = 0; i < test_y.size(); ++i) {
          const MixtureDistribution mix =
              smooth(refit_model.predict(z_test[i]), spec);
          logs_scores[i] = log_score(mix, test_y[i]);
          crps_scores[i] = crps(mix, test_y[i]);
        }
        rec.test_logs = mean_or_inf(logs_scores);
      } else {
        for (std::size_t i = 0; i < test_y.size(); ++i) {
          crps_scores[i] = crps(refit_model.predict(z_test[i]), test_y[i]);
        }
      }
      rec.test_crps = mean_or_inf(crps_scores);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  });

  double sum_logs = 0.0, sum_crps = 0.0;
  std::size_t n_ok = 0;
  for (const auto& rec : report.splits) {
    if (!rec.error.empty()) continue;
    ++n_ok;
    sum_logs += rec.test_logs;
    sum_crps += rec.test_crps;
  }
  report.mean_logs = n_ok > 0 ? sum_logs / static_cast<double>(n_ok) : kNaN;
  report.mean_crps = n_ok > 0 ? sum_crps / static_cast<double>(n_ok) : kNaN;
  return report;
}

std::string to_json(const WorkflowReport& report) {
  nlohmann::json j;
  j["smoothed"] = report.smoothed;
  j["mean_logs"] = report.mean_logs;
  j["mean_crps"] = report.mean_crps;
  auto splits = nlohmann::json::array();
  for (const auto& rec : report.splits) {
    nlohmann::json s;
    s["split_index"] = rec.split_index;
    if (!rec.error.empty()) {
      s["error"] = rec.error;
      splits.push_back(std::move(s));
      continue;
    }
    auto trials = nlohmann::json::array();
    for (const auto& trial : rec.trials) {
      nlohmann::json t;
      t["hyperparameters"] = trial.hp;
      t["validation_score"] = trial.validation_score;
      if (report.smoothed) {
        t["nu"] = std::isinf(trial.nu) ? nlohmann::json("inf")
                                       : nlohmann::json(trial.nu);
        t["h"] = trial.h;
        t["fallback_used"] = trial.fallback_used;
      }
      trials.push_back(std::move(t));
    }
    s["trials"] = std::move(trials);
    s["selected"] = rec.selected;
    s["test_crps"] = rec.test_crps;
    if (report.smoothed) s["test_logs"] = rec.test_logs;
    s["train_indices"] = rec.indices.train;
    s["validation_indices"] = rec.indices.validation;
    s["test_indices"] = rec.indices.test;
    splits.push_back(std::move(s));
  }
  j["splits"] = std::move(splits);
  return j.dump(2);
}

}  // namespace easyuq
