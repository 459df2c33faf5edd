#ifndef EASYUQ_WORKFLOW_HPP
#define EASYUQ_WORKFLOW_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "easyuq/scoring.hpp"
#include "easyuq/types.hpp"

namespace easyuq {

using Hyperparams = std::map<std::string, double>;
using FeatureMatrix = std::vector<std::vector<double>>;  // n rows, d columns

struct Dataset {
  std::vector<std::string> feature_names;
  FeatureMatrix features;
  std::vector<double> outcomes;

  std::size_t size() const { return outcomes.size(); }
};

// A deterministic single-valued regressor standing in for the learned
// model in the pipeline.
class PointPredictor {
 public:
  virtual ~PointPredictor() = default;
  virtual void fit(const FeatureMatrix& features, std::span<const double> y,
                   const Hyperparams& hp) = 0;
  virtual std::vector<double> predict(const FeatureMatrix& features) const = 0;
  virtual std::string name() const = 0;
};

using PredictorFactory = std::function<std::unique_ptr<PointPredictor>()>;

// Built-in predictors: "identity" (single feature passed through),
// "least_squares" (linear model with optional "ridge" penalty), and
// "knn" (k-nearest-neighbour mean, hyperparameter "k").
PredictorFactory make_predictor_factory(const std::string& name);

// Repeated shuffled splits into contiguous train/validation/test slices;
// deterministic per seed.
struct SplitPlan {
  std::size_t n_splits = 20;
  double train_fraction = 0.72;
  double validation_fraction = 0.18;  // test gets the remainder
  std::uint64_t seed = 1;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

SplitIndices make_split(std::size_t n, const SplitPlan& plan,
                        std::size_t split_index);

struct HyperTrial {
  Hyperparams hp;
  double nu = 0.0;
  double h = 0.0;
  bool fallback_used = false;
  double validation_score = 0.0;
};

struct SplitRecord {
  std::size_t split_index = 0;
  std::vector<HyperTrial> trials;
  std::size_t selected = 0;  // index into trials
  double test_logs = 0.0;    // NaN when not smoothed
  double test_crps = 0.0;
  SplitIndices indices;
  std::string error;  // nonempty when the split was aborted
};

struct WorkflowReport {
  std::vector<SplitRecord> splits;
  double mean_logs = 0.0;  // mean of per-split test means
  double mean_crps = 0.0;
  bool smoothed = true;
};

struct WorkflowConfig {
  bool smooth = true;  // false: step CDFs scored by CRPS throughout
  unsigned threads = 0;
};

// Split-based pipeline: per split, every hyperparameter setting is
// learned on the training slice, wrapped with a fitted conditional-CDF
// model and (when smoothing) moderated kernel selection, and scored on
// the validation slice.  The best setting is re-learned on train plus
// validation, re-fitted, and scored on the held-out test slice with the
// previously selected kernel parameters.  Test outcomes never enter
// fitting or selection.
WorkflowReport run_workflow(const Dataset& dataset,
                            const PredictorFactory& factory,
                            const std::vector<Hyperparams>& hypergrid,
                            const SplitPlan& plan,
                            const WorkflowConfig& config = {});

std::string to_json(const WorkflowReport& report);

}  // namespace easyuq

#endif  // EASYUQ_WORKFLOW_HPP
