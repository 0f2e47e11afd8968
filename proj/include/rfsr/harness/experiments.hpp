#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfsr/diagnostics.hpp"
#include "rfsr/harness/plan.hpp"
#include "rfsr/types.hpp"

namespace rfsr::harness {

/// One line of results.csv. T = 0 and NaN lambda print as empty fields.
struct ResultRow {
  std::size_t n = 0;
  int M = 0;
  int T = 0;
  double lambda = 0.0;
  int rep = 0;
  std::string metric;
  double value = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  nlohmann::json summary;
  /// Set for experiments that judge a claim (plateau, rate sweep, kernel decay).
  std::optional<bool> pass;
  /// Extra plot-ready tables: file name -> CSV text.
  std::vector<std::pair<std::string, std::string>> tables;
};

struct RunOptions {
  int workers = 1;
  Limits limits;
  /// Progress messages (may be empty).
  std::function<void(const std::string&)> log;
};

/// Calls job(i) for i in [0, count) on up to `workers` threads. Exceptions are
/// rethrown after all workers finish (the lowest failing index wins).
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job);

ExperimentResult run_heatmap(const ExperimentPlan& plan, const RunOptions& options = {});
ExperimentResult run_plateau_check(const ExperimentPlan& plan, const RunOptions& options = {});
ExperimentResult run_rate_sweep(const ExperimentPlan& plan, const RunOptions& options = {});
ExperimentResult run_kernel_approx_decay(const ExperimentPlan& plan,
                                         const RunOptions& options = {});
/// Dispatch on plan.experiment.
ExperimentResult run_experiment(const ExperimentPlan& plan, const RunOptions& options = {});

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double standard_error = 0.0;
};
/// Ordinary least squares y = a + s x. Needs >= 2 points (SE needs >= 3).
SlopeFit ols_fit(const std::vector<double>& x, const std::vector<double>& y);

/// The plan's designer problem (also the target of the "normal" data source).
DesignerProblem plan_problem(const ExperimentPlan& plan);
/// Feature parameters for plan.model; designer kinds need `problem`.
FeatureParams plan_feature_params(const ExperimentPlan& plan, const DesignerProblem* problem);
/// Filter for plan.model. Without an explicit step, iterative filters use the
/// default rule for the supplied kappa^2.
SpectralFilter plan_filter(const ModelSpec& model, double kappa_sq);

/// Training and test data for one heatmap repetition.
struct SplitData {
  Matrix X_train;
  Vector y_train;
  Matrix X_test;
  Vector y_test;
};
SplitData heatmap_data(const ExperimentPlan& plan, int rep);

}  // namespace rfsr::harness
