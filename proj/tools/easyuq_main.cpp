// Command line front end: fit, predict, score, tune, simulate, consistency
// and workflow subcommands over CSV and JSON files.  Exit codes: 0 success,
// 2 usage or input error, 3 numeric failure.  stdout carries data, stderr
// carries diagnostics.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "easyuq/baselines.hpp"
#include "easyuq/csv.hpp"
#include "easyuq/idr.hpp"
#include "easyuq/scoring.hpp"
#include "easyuq/simulation.hpp"
#include "easyuq/smoothing.hpp"
#include "easyuq/tuning.hpp"
#include "easyuq/workflow.hpp"

namespace {

using namespace easyuq;

KernelSpec parse_kernel(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw std::invalid_argument("--kernel expects \"nu,h\" (nu may be inf)");
  }
  const std::string nu_text = text.substr(0, comma);
  const double h = std::stod(text.substr(comma + 1));
  if (nu_text == "inf" || nu_text == "gaussian") {
    return KernelSpec::gaussian(h);
  }
  return KernelSpec(std::stod(nu_text), h);
}

TrainingData read_pairs(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) {
    throw std::invalid_argument("empty sample: " + path + " has no data rows");
  }
  return TrainingData(table.column("x"), table.column("y"));
}

std::string nu_label(double nu) {
  if (std::isinf(nu)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", nu);
  return buf;
}

void print_tuning(const TuningResult& result) {
  std::cout << "nu,h,criterion\n";
  std::cout.precision(10);
  for (const auto& row : result.per_nu) {
    std::cout << nu_label(row.nu) << ',' << row.h << ',' << row.criterion
              << '\n';
  }
  std::cout << "best_nu," << nu_label(result.best.nu) << '\n';
  std::cout << "best_h," << result.best.h << '\n';
  std::cout << "criterion," << result.criterion_value << '\n';
  std::cout << "fallback_used," << (result.fallback_used ? "true" : "false")
            << '\n';
  if (result.skipped_cases > 0) {
    std::cout << "skipped_cases," << result.skipped_cases << '\n';
  }
}

nlohmann::json tuning_to_json(const TuningResult& result) {
  nlohmann::json j;
  j["best"] = {{"nu", std::isinf(result.best.nu)
                          ? nlohmann::json("inf")
                          : nlohmann::json(result.best.nu)},
               {"h", result.best.h}};
  j["criterion"] = result.criterion_value;
  j["fallback_used"] = result.fallback_used;
  j["skipped_cases"] = result.skipped_cases;
  auto rows = nlohmann::json::array();
  for (const auto& row : result.per_nu) {
    rows.push_back({{"nu", std::isinf(row.nu) ? nlohmann::json("inf")
                                              : nlohmann::json(row.nu)},
                    {"h", row.h},
                    {"criterion", row.criterion}});
  }
  j["per_nu"] = std::move(rows);
  return j;
}

int cmd_fit(const std::string& input, const std::string& output) {
  const TrainingData data = read_pairs(input);
  const IdrModel model = fit_idr(data);
  save_model(model, output);
  std::cout << "n," << data.size() << "\nk," << model.k() << "\nm,"
            << model.m() << '\n';
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input,
                const std::string& output, std::vector<double> levels,
                const std::optional<KernelSpec>& kernel) {
  const IdrModel model = load_model(model_path);
  const CsvTable queries = read_csv(input);
  const auto xs = queries.column("x");

  std::vector<std::string> header{"x"};
  for (double level : levels) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "q%g", level);
    header.emplace_back(buf);
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(xs.size());
  for (double x : xs) {
    std::vector<double> row{x};
    const StepCdf step = model.predict(x);
    if (kernel) {
      const MixtureDistribution mix = smooth(step, *kernel);
      for (double level : levels) row.push_back(mix.quantile(level));
    } else {
      for (double level : levels) row.push_back(step.quantile(level));
    }
    rows.push_back(std::move(row));
  }
  write_csv(output, header, rows);
  std::cout << "predictions," << rows.size() << '\n';
  return 0;
}

int cmd_score(const std::optional<std::string>& model_path,
              const std::optional<std::string>& baseline,
              const std::optional<std::string>& train_path,
              const std::string& test_path, const std::string& score_name,
              const std::optional<KernelSpec>& kernel,
              const std::optional<std::string>& output) {
  const TrainingData test = read_pairs(test_path);
  const Score score = score_name == "logs" ? Score::logs : Score::crps;

  std::vector<double> per_case(test.size());
  if (baseline) {
    if (*baseline != "single-gaussian") {
      throw std::invalid_argument("unknown baseline '" + *baseline + "'");
    }
    if (!train_path) {
      throw std::invalid_argument("--baseline needs --train to fit sigma");
    }
    const SingleGaussian fitted = fit_single_gaussian(read_pairs(*train_path));
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto mix = fitted.predict(test.x()[i]);
      per_case[i] = score == Score::logs ? log_score(mix, test.y()[i])
                                         : crps(mix, test.y()[i]);
    }
  } else if (model_path) {
    const IdrModel model = load_model(*model_path);
    if (score == Score::logs && !kernel) {
      throw std::invalid_argument(
          "log score needs --kernel: step predictions have no density");
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      const StepCdf step = model.predict(test.x()[i]);
      if (kernel) {
        const auto mix = smooth(step, *kernel);
        per_case[i] = score == Score::logs ? log_score(mix, test.y()[i])
                                           : crps(mix, test.y()[i]);
      } else {
        per_case[i] = crps(step, test.y()[i]);
      }
    }
  } else {
    throw std::invalid_argument("provide --model or --baseline");
  }

  const ScoreReport report = mean_score(per_case);
  if (output) {
    std::vector<std::vector<double>> rows;
    rows.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
      rows.push_back({test.x()[i], test.y()[i], per_case[i]});
    }
    write_csv(*output, {"x", "y", score_name}, rows);
  }
  std::cout.precision(17);
  std::cout << "n_cases," << report.n_cases << '\n';
  std::cout << "mean_" << score_name << ',' << report.mean << '\n';
  if (report.n_infinite > 0) {
    std::cout << "n_infinite," << report.n_infinite << '\n';
  }
  return 0;
}

int cmd_tune(const std::string& model_path, const std::string& train_path,
             const std::string& mode, const std::string& score_name,
             unsigned threads, const std::optional<std::string>& output) {
  const IdrModel model = load_model(model_path);
  const TrainingData data = read_pairs(train_path);
  const Score score = score_name == "crps" ? Score::crps : Score::logs;
  const TuningResult result =
      mode == "moderated" ? moderated_grid_search(model, data, score, threads)
                          : one_fit_grid_search(model, data, score, threads);
  print_tuning(result);
  if (output) {
    std::ofstream out(*output);
    if (!out) {
      throw std::invalid_argument("cannot open for writing: " + *output);
    }
    out << tuning_to_json(result).dump(2) << '\n';
  }
  return 0;
}

int cmd_simulate(std::size_t n, std::uint64_t seed, const std::string& output) {
  write_training_csv(output, simulate_gamma({n, seed}));
  std::cout << "rows," << n << '\n';
  return 0;
}

int cmd_consistency(const std::vector<std::size_t>& sizes, std::size_t n_seeds,
                    std::uint64_t seed, unsigned threads,
                    const std::string& output) {
  ConsistencyConfig config;
  config.sizes = sizes;
  for (std::size_t s = 0; s < n_seeds; ++s) config.seeds.push_back(seed + s);
  config.threads = threads;
  const auto rows = consistency_experiment(config);
  write_consistency_csv(output, rows);

  std::cout << "n,median_sup_basic,median_sup_smooth\n";
  std::cout.precision(10);
  for (std::size_t n : sizes) {
    std::vector<double> basic, smoothed;
    for (const auto& row : rows) {
      if (row.n == n) {
        basic.push_back(row.sup_error_basic);
        smoothed.push_back(row.sup_error_smooth);
      }
    }
    std::sort(basic.begin(), basic.end());
    std::sort(smoothed.begin(), smoothed.end());
    std::cout << n << ',' << basic[basic.size() / 2] << ','
              << smoothed[smoothed.size() / 2] << '\n';
  }
  return 0;
}

int cmd_workflow(const std::string& input, const std::string& outcome,
                 const std::string& predictor,
                 const std::optional<std::string>& hypergrid_path,
                 std::size_t splits, std::uint64_t seed, bool basic,
                 unsigned threads, const std::string& output) {
  const CsvTable table = read_csv(input);
  const std::size_t outcome_col = table.column_index(outcome);

  Dataset dataset;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c != outcome_col) dataset.feature_names.push_back(table.header[c]);
  }
  dataset.features.reserve(table.rows.size());
  dataset.outcomes.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    std::vector<double> features;
    features.reserve(row.size() - 1);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c != outcome_col) features.push_back(row[c]);
    }
    dataset.features.push_back(std::move(features));
    dataset.outcomes.push_back(row[outcome_col]);
  }

  std::vector<Hyperparams> grid;
  if (hypergrid_path) {
    std::ifstream in(*hypergrid_path);
    if (!in) {
      throw std::invalid_argument("cannot open hypergrid: " + *hypergrid_path);
    }
    const nlohmann::json j = nlohmann::json::parse(in);
    for (const auto& entry : j) {
      grid.push_back(entry.get<Hyperparams>());
    }
  } else {
    grid.push_back({});
  }

  SplitPlan plan;
  plan.n_splits = splits;
  plan.seed = seed;
  WorkflowConfig config;
  config.smooth = !basic;
  config.threads = threads;

  const WorkflowReport report = run_workflow(
      dataset, make_predictor_factory(predictor), grid, plan, config);

  std::ofstream out(output);
  if (!out) {
    throw std::invalid_argument("cannot open for writing: " + output);
  }
  out << to_json(report) << '\n';

  std::cout.precision(17);
  std::cout << "splits," << report.splits.size() << '\n';
  std::cout << "mean_crps," << report.mean_crps << '\n';
  if (config.smooth) std::cout << "mean_logs," << report.mean_logs << '\n';
  std::size_t failed = 0;
  for (const auto& rec : report.splits) {
    if (!rec.error.empty()) ++failed;
  }
  if (failed > 0) std::cout << "failed_splits," << failed << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrated predictive distributions from single-valued model output"};
  app.require_subcommand(1);

  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)")
      ->capture_default_str();

  // fit
  auto* fit = app.add_subcommand("fit", "fit a model from x,y training pairs");
  std::string fit_input, fit_output;
  fit->add_option("--input", fit_input, "training CSV with columns x,y")
      ->required();
  fit->add_option("--output", fit_output, "model JSON path")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "quantiles at query points");
  std::string predict_model, predict_input, predict_output;
  std::vector<double> levels{0.05, 0.25, 0.5, 0.75, 0.95};
  std::string predict_kernel;
  predict->add_option("--model", predict_model, "model JSON")->required();
  predict->add_option("--input", predict_input, "query CSV with column x")
      ->required();
  predict->add_option("--output", predict_output, "output CSV")->required();
  predict->add_option("--levels", levels, "quantile levels in (0,1)")
      ->delimiter(',');
  predict->add_option("--kernel", predict_kernel,
                      "nu,h: smooth before extracting quantiles");

  // score
  auto* score = app.add_subcommand("score", "mean score on a test set");
  std::string score_model, score_baseline, score_train, score_test;
  std::string score_name = "crps", score_kernel, score_output;
  score->add_option("--model", score_model, "model JSON");
  score->add_option("--baseline", score_baseline,
                    "reference method (single-gaussian)");
  score->add_option("--train", score_train, "training CSV for the baseline");
  score->add_option("--test", score_test, "test CSV with columns x,y")
      ->required();
  score->add_option("--score", score_name, "crps or logs")
      ->check(CLI::IsMember({"crps", "logs"}));
  score->add_option("--kernel", score_kernel, "nu,h kernel for smoothing");
  score->add_option("--output", score_output, "per-case CSV");

  // tune
  auto* tune = app.add_subcommand("tune", "kernel parameter selection");
  std::string tune_model, tune_train, tune_mode = "multiple";
  std::string tune_score = "logs", tune_output;
  tune->add_option("--model", tune_model, "model JSON")->required();
  tune->add_option("--train", tune_train, "training CSV the model was fit on")
      ->required();
  tune->add_option("--mode", tune_mode, "multiple or moderated")
      ->check(CLI::IsMember({"multiple", "moderated"}));
  tune->add_option("--score", tune_score, "logs or crps")
      ->check(CLI::IsMember({"logs", "crps"}));
  tune->add_option("--output", tune_output, "result JSON");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "draw synthetic x,y pairs");
  std::size_t sim_n = 500;
  std::uint64_t sim_seed = 1;
  std::string sim_output;
  simulate->add_option("--n", sim_n, "sample size")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "rng seed")->capture_default_str();
  simulate->add_option("--output", sim_output, "output CSV")->required();

  // consistency
  auto* consistency =
      app.add_subcommand("consistency", "sup-error table over sample sizes");
  std::vector<std::size_t> sizes{250, 1000, 4000};
  std::size_t n_seeds = 10;
  std::uint64_t cons_seed = 1;
  std::string cons_output;
  consistency->add_option("--sizes", sizes, "sample sizes")->delimiter(',');
  consistency->add_option("--seeds", n_seeds, "number of seeds per size")
      ->capture_default_str();
  consistency->add_option("--seed", cons_seed, "first rng seed")
      ->capture_default_str();
  consistency->add_option("--output", cons_output, "error table CSV")
      ->required();

  // workflow
  auto* workflow =
      app.add_subcommand("workflow", "split-based train/validate/test pipeline");
  std::string wf_input, wf_outcome = "y", wf_predictor = "identity";
  std::string wf_hypergrid, wf_output;
  std::size_t wf_splits = 20;
  std::uint64_t wf_seed = 1;
  bool wf_basic = false;
  workflow->add_option("--input", wf_input, "dataset CSV")->required();
  workflow->add_option("--outcome", wf_outcome, "outcome column name")
      ->capture_default_str();
  workflow
      ->add_option("--predictor", wf_predictor,
                   "identity, least_squares or knn")
      ->check(CLI::IsMember({"identity", "least_squares", "knn"}));
  workflow->add_option("--hypergrid", wf_hypergrid,
                       "JSON array of hyperparameter objects");
  workflow->add_option("--splits", wf_splits, "number of splits")
      ->capture_default_str();
  workflow->add_option("--seed", wf_seed, "split seed")->capture_default_str();
  workflow->add_flag("--basic", wf_basic,
                     "skip smoothing; select and score by CRPS");
  workflow->add_option("--output", wf_output, "report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit) return cmd_fit(fit_input, fit_output);
    if (*predict) {
      std::optional<KernelSpec> kernel;
      if (!predict_kernel.empty()) kernel = parse_kernel(predict_kernel);
      return cmd_predict(predict_model, predict_input, predict_output, levels,
                         kernel);
    }
    if (*score) {
      std::optional<KernelSpec> kernel;
      if (!score_kernel.empty()) kernel = parse_kernel(score_kernel);
      return cmd_score(
          score_model.empty() ? std::nullopt : std::optional(score_model),
          score_baseline.empty() ? std::nullopt : std::optional(score_baseline),
          score_train.empty() ? std::nullopt : std::optional(score_train),
          score_test, score_name, kernel,
          score_output.empty() ? std::nullopt : std::optional(score_output));
    }
    if (*tune) {
      return cmd_tune(tune_model, tune_train, tune_mode, tune_score, threads,
                      tune_output.empty() ? std::nullopt
                                          : std::optional(tune_output));
    }
    if (*simulate) return cmd_simulate(sim_n, sim_seed, sim_output);
    if (*consistency) {
      return cmd_consistency(sizes, n_seeds, cons_seed, threads, cons_output);
    }
    if (*workflow) {
      return cmd_workflow(wf_input, wf_outcome, wf_predictor,
                          wf_hypergrid.empty() ? std::nullopt
                                               : std::optional(wf_hypergrid),
                          wf_splits, wf_seed, wf_basic, threads, wf_output);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
