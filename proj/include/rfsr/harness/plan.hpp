#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfsr/feature_map.hpp"
#include "rfsr/harness/dataset.hpp"
#include "rfsr/harness/schedules.hpp"
#include "rfsr/spectral_filter.hpp"

namespace rfsr::harness {

enum class ExperimentKind { Heatmap, RateSweep, PlateauCheck, KernelApproxDecay };
std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct ScheduleSpec {
  double C_lambda = 1.0;
  double C_M = 4.0;
  double r = 0.5;
  double b = 1.0;
  double delta = kNeutralDelta;
};

/// Finite-rank designer problem (spectrum j^{-1/b}, source g = L^r h).
struct DesignerSpec {
  int rank = 1024;
  double b = 1.0;
  double r = 0.5;
  double R = 1.0;
  double noise_std = 0.5;
  double source_decay = 1.0;
};

/// Where the training and test data come from.
///  designer: x ~ U[0,1] with the designer target (rate sweeps).
///  normal:   x ~ N(0, I_d); the designer target read at Phi(x_1), Phi the
///            standard normal CDF, plus Gaussian noise.
///  csv:      rows of an external file; the first n rows train, the next
///            n_test rows test.
struct DataSpec {
  std::string source = "normal";
  int input_dim = 1;
  std::string csv_path;
  CsvOptions csv;
};

struct ModelSpec {
  FeatureKind feature = FeatureKind::NtkOneLayer;
  double bandwidth = 1.0;
  NtkParams ntk;
  FilterKind filter = FilterKind::Landweber;
  /// Step size. Empty selects 1 / max_i ||Phi(x_i)||^2 on the training rows
  /// (Landweber) or the default Heavyball rule.
  std::optional<double> step;
  double momentum = 0.0;
};

struct PlateauSpec {
  /// Anchor columns M = round(c sqrt(n) d).
  double low_factor = 4.0;
  double high_factor = 20.0;
  double tolerance = 0.05;
  int min_repetitions = 10;
};

struct KernelDecaySpec {
  double bandwidth = 1.0;
  /// ||x - y|| of the probe pair.
  double distance = 1.0;
  int input_dim = 1;
  /// Admissible band for the error ratio between consecutive M values.
  double ratio_low = 1.6;
  double ratio_high = 2.5;
};

struct ExperimentPlan {
  ExperimentKind experiment = ExperimentKind::Heatmap;
  std::uint64_t seed = 0;
  int repetitions = 50;
  std::vector<std::size_t> n_grid = {5000};
  /// Heatmap / plateau columns. Empty with plateau: the two anchors.
  std::vector<int> M_grid;
  std::vector<int> T_grid = {1, 3, 10, 30, 100, 300, 1000};
  /// Rate sweep: override the lambda schedule per n (same length as n_grid).
  std::vector<double> lambda_grid;
  std::size_t n_test = 5000;
  DataSpec data;
  DesignerSpec designer;
  ModelSpec model;
  ScheduleSpec schedule;
  PlateauSpec plateau;
  KernelDecaySpec kernel_decay;
  /// Rate sweep: judge |slope - target| <= tolerance when set.
  std::optional<double> slope_tolerance;
  bool write_summary = true;
};

/// Default plan for each experiment kind.
ExperimentPlan default_plan(ExperimentKind kind);

/// Parse a JSON plan. Missing fields take the defaults of `experiment`.
ExperimentPlan plan_from_json(const nlohmann::json& j);
/// Fully resolved plan (every field explicit).
nlohmann::json plan_to_json(const ExperimentPlan& plan);

/// Checks grids, repetitions and schedule preconditions.
void validate_plan(const ExperimentPlan& plan);

/// M = round(c sqrt(n) d), at least 1.
int anchor_columns(std::size_t n, int input_dim, double factor);

}  // namespace rfsr::harness
