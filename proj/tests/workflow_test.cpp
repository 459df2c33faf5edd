#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include <json.hpp>

#include "easyuq/idr.hpp"
#include "easyuq/scoring.hpp"
#include "easyuq/simulation.hpp"
#include "easyuq/smoothing.hpp"
#include "easyuq/tuning.hpp"
#include "easyuq/workflow.hpp"

using namespace easyuq;

namespace {

Dataset simulated_dataset(std::size_t n, std::uint64_t seed) {
  const TrainingData data = simulate_gamma({n, seed});
  Dataset out;
  out.feature_names = {"x"};
  out.features.reserve(n);
  for (double x : data.x()) out.features.push_back({x});
  out.outcomes = data.y();
  return out;
}

}  // namespace

TEST_CASE("splits are deterministic with the requested fractions") {
  SplitPlan plan;
  plan.seed = 11;
  const auto a = make_split(1000, plan, 3);
  const auto b = make_split(1000, plan, 3);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);
  CHECK(a.train.size() == 720);
  CHECK(a.validation.size() == 180);
  CHECK(a.test.size() == 100);

  const auto c = make_split(1000, plan, 4);
  CHECK(a.train != c.train);

  // a partition: each index occurs exactly once
  std::vector<int> seen(1000, 0);
  for (auto i : a.train) seen[i] += 1;
  for (auto i : a.validation) seen[i] += 1;
  for (auto i : a.test) seen[i] += 1;
  for (int count : seen) CHECK(count == 1);

  CHECK_THROWS_AS(make_split(5, plan, 0), std::invalid_argument);
}

TEST_CASE("built-in predictors") {
  const FeatureMatrix x{{1.0}, {2.0}, {3.0}, {4.0}};
  const std::vector<double> y{2.0, 4.0, 6.0, 8.0};

  auto identity = make_predictor_factory("identity")();
  identity->fit(x, y, {});
  CHECK(identity->predict({{7.5}}) == std::vector<double>{7.5});

  auto ls = make_predictor_factory("least_squares")();
  ls->fit(x, y, {});
  CHECK(ls->predict({{5.0}})[0] == doctest::Approx(10.0).epsilon(1e-9));

  auto knn = make_predictor_factory("knn")();
  knn->fit(x, y, {{"k", 2.0}});
  CHECK(knn->predict({{1.1}})[0] == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS(make_predictor_factory("mlp"), std::invalid_argument);
}

TEST_CASE("identity pipeline reduces to a direct fit and score") {
  const Dataset dataset = simulated_dataset(400, 21);
  SplitPlan plan;
  plan.n_splits = 3;
  plan.seed = 5;
  WorkflowConfig config;
  config.threads = 1;

  const WorkflowReport report =
      run_workflow(dataset, make_predictor_factory("identity"),
                   {Hyperparams{}}, plan, config);
  REQUIRE(report.splits.size() == 3);
  for (const auto& rec : report.splits) {
    REQUIRE(rec.error.empty());
    REQUIRE(rec.trials.size() == 1);
    CHECK(rec.selected == 0);
  }

  // the same steps done by hand per split must give the same test CRPS
  auto direct_run = [&](const SplitRecord& rec) {
    std::vector<double> x, y;
    for (auto i : rec.indices.train) {
      x.push_back(dataset.features[i][0]);
      y.push_back(dataset.outcomes[i]);
    }
    const TrainingData train(x, y);
    const TuningResult tuned = moderated_grid_search(fit_idr(train), train);
    CHECK(tuned.best.nu == rec.trials[0].nu);
    CHECK(tuned.best.h == rec.trials[0].h);

    for (auto i : rec.indices.validation) {
      x.push_back(dataset.features[i][0]);
      y.push_back(dataset.outcomes[i]);
    }
    const IdrModel refit = fit_idr(TrainingData(x, y));
    std::vector<double> crps_scores;
    for (auto i : rec.indices.test) {
      const auto mix = smooth(refit.predict(dataset.features[i][0]), tuned.best);
      crps_scores.push_back(crps(mix, dataset.outcomes[i]));
    }
    return mean_score(crps_scores).mean;
  };

  double direct_sum = 0.0;
  for (const auto& rec : report.splits) {
    const double direct = direct_run(rec);
    CHECK(rec.test_crps == doctest::Approx(direct).epsilon(1e-10));
    direct_sum += direct;
  }
  // pipeline grand mean within 10% of the direct fit-and-score runs
  CHECK(report.mean_crps == doctest::Approx(direct_sum / 3.0).epsilon(0.10));
}

TEST_CASE("selection picks the smallest validation score") {
  const Dataset dataset = simulated_dataset(300, 33);
  SplitPlan plan;
  plan.n_splits = 2;
  plan.seed = 9;
  const std::vector<Hyperparams> grid{{{"k", 3.0}}, {{"k", 10.0}}, {{"k", 40.0}}};

  const WorkflowReport report = run_workflow(
      dataset, make_predictor_factory("knn"), grid, plan, {true, 1});
  for (const auto& rec : report.splits) {
    REQUIRE(rec.error.empty());
    REQUIRE(rec.trials.size() == 3);
    for (const auto& trial : rec.trials) {
      CHECK(rec.trials[rec.selected].validation_score <=
            trial.validation_score);
    }
  }
}

TEST_CASE("runs are deterministic") {
  const Dataset dataset = simulated_dataset(250, 77);
  SplitPlan plan;
  plan.n_splits = 2;
  plan.seed = 123;
  const std::vector<Hyperparams> grid{{{"k", 5.0}}, {{"k", 15.0}}};

  const WorkflowReport a = run_workflow(
      dataset, make_predictor_factory("knn"), grid, plan, {true, 2});
  const WorkflowReport b = run_workflow(
      dataset, make_predictor_factory("knn"), grid, plan, {true, 1});
  REQUIRE(a.splits.size() == b.splits.size());
  for (std::size_t s = 0; s < a.splits.size(); ++s) {
    CHECK(a.splits[s].selected == b.splits[s].selected);
    CHECK(a.splits[s].test_crps == b.splits[s].test_crps);
    CHECK(a.splits[s].test_logs == b.splits[s].test_logs);
  }
  CHECK(a.mean_crps == b.mean_crps);
}

TEST_CASE("test outcomes never affect selection") {
  const Dataset dataset = simulated_dataset(300, 42);
  SplitPlan plan;
  plan.n_splits = 2;
  plan.seed = 31;
  const std::vector<Hyperparams> grid{{{"k", 4.0}}, {{"k", 12.0}}};

  const WorkflowReport before = run_workflow(
      dataset, make_predictor_factory("knn"), grid, plan, {true, 1});

  // poison one split's test outcomes at a time; the same index can sit in
  // another split's training slice, so splits are checked one by one
  for (std::size_t s = 0; s < plan.n_splits; ++s) {
    Dataset poisoned = dataset;
    for (auto i : before.splits[s].indices.test) {
      poisoned.outcomes[i] += 1000.0;
    }
    SplitPlan partial = plan;
    partial.n_splits = s + 1;
    const WorkflowReport after = run_workflow(
        poisoned, make_predictor_factory("knn"), grid, partial, {true, 1});

    CHECK(before.splits[s].selected == after.splits[s].selected);
    for (std::size_t t = 0; t < before.splits[s].trials.size(); ++t) {
      CHECK(before.splits[s].trials[t].nu == after.splits[s].trials[t].nu);
      CHECK(before.splits[s].trials[t].h == after.splits[s].trials[t].h);
      CHECK(before.splits[s].trials[t].validation_score ==
            after.splits[s].trials[t].validation_score);
    }
  }
}

TEST_CASE("grand mean equals the mean of per-split means") {
  const Dataset dataset = simulated_dataset(260, 3);
  SplitPlan plan;
  plan.n_splits = 4;
  plan.seed = 8;
  const WorkflowReport report = run_workflow(
      dataset, make_predictor_factory("identity"), {Hyperparams{}}, plan,
      {true, 2});
  double sum_crps = 0.0, sum_logs = 0.0;
  for (const auto& rec : report.splits) {
    REQUIRE(rec.error.empty());
    sum_crps += rec.test_crps;
    sum_logs += rec.test_logs;
  }
  CHECK(report.mean_crps == sum_crps / 4.0);
  CHECK(report.mean_logs == sum_logs / 4.0);
}

TEST_CASE("basic mode scores step predictions with crps") {
  const Dataset dataset = simulated_dataset(300, 50);
  SplitPlan plan;
  plan.n_splits = 2;
  plan.seed = 66;

  const WorkflowReport basic = run_workflow(
      dataset, make_predictor_factory("identity"), {Hyperparams{}}, plan,
      {false, 1});
  const WorkflowReport smooth_report = run_workflow(
      dataset, make_predictor_factory("identity"), {Hyperparams{}}, plan,
      {true, 1});

  CHECK_FALSE(basic.smoothed);
  for (const auto& rec : basic.splits) {
    REQUIRE(rec.error.empty());
    CHECK(std::isnan(rec.test_logs));
    CHECK(rec.test_crps > 0.0);
  }
  // smoothing helps or is neutral on continuous data, within a loose band
  CHECK(smooth_report.mean_crps <= basic.mean_crps * 1.15);
  CHECK(basic.mean_crps <= smooth_report.mean_crps * 1.15);
}

TEST_CASE("constant outcomes give point masses and zero crps") {
  Dataset dataset;
  dataset.feature_names = {"x"};
  for (int i = 0; i < 120; ++i) {
    dataset.features.push_back({static_cast<double>(i)});
    dataset.outcomes.push_back(5.0);
  }
  SplitPlan plan;
  plan.n_splits = 2;
  plan.seed = 2;
  const WorkflowReport report = run_workflow(
      dataset, make_predictor_factory("identity"), {Hyperparams{}}, plan,
      {false, 1});
  for (const auto& rec : report.splits) {
    REQUIRE(rec.error.empty());
    CHECK(rec.test_crps == 0.0);
  }
  CHECK(report.mean_crps == 0.0);
}

TEST_CASE("predictor failure aborts the split with a recorded error") {
  // the identity predictor rejects multi-feature data
  Dataset dataset;
  dataset.feature_names = {"a", "b"};
  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    dataset.features.push_back({rng.uniform(), rng.uniform()});
    dataset.outcomes.push_back(rng.normal());
  }
  SplitPlan plan;
  plan.n_splits = 3;
  const WorkflowReport report = run_workflow(
      dataset, make_predictor_factory("identity"), {Hyperparams{}}, plan,
      {true, 1});
  REQUIRE(report.splits.size() == 3);
  for (const auto& rec : report.splits) {
    CHECK_FALSE(rec.error.empty());
  }
  CHECK(std::isnan(report.mean_crps));
  const std::string text = to_json(report);
  CHECK(text.find("\"error\"") != std::string::npos);
}

TEST_CASE("input validation") {
  const Dataset dataset = simulated_dataset(50, 1);
  SplitPlan plan;
  CHECK_THROWS_AS(run_workflow(dataset, make_predictor_factory("identity"), {},
                               plan, {true, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_workflow(Dataset{}, make_predictor_factory("identity"),
                               {Hyperparams{}}, plan, {true, 1}),
                  std::invalid_argument);
}

TEST_CASE("report serializes to parseable json") {
  const Dataset dataset = simulated_dataset(150, 4);
  SplitPlan plan;
  plan.n_splits = 1;
  plan.seed = 19;
  const WorkflowReport report = run_workflow(
      dataset, make_predictor_factory("identity"), {Hyperparams{}}, plan,
      {true, 1});
  const nlohmann::json parsed = nlohmann::json::parse(to_json(report));
  CHECK(parsed.at("mean_crps").get<double>() ==
        doctest::Approx(report.mean_crps));
  REQUIRE(parsed.at("splits").size() == 1);
  const auto& split = parsed.at("splits")[0];
  CHECK(split.at("trials").size() == 1);
  CHECK(split.at("test_indices").size() ==
        report.splits[0].indices.test.size());
  CHECK(split.at("test_crps").get<double>() ==
        doctest::Approx(report.splits[0].test_crps));
}
