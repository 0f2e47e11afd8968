#include "rfsr/harness/plan.hpp"

#include <algorithm>
#include <cmath>

#include "rfsr/errors.hpp"

namespace rfsr::harness {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Heatmap: return "heatmap";
    case ExperimentKind::RateSweep: return "rate_sweep";
    case ExperimentKind::PlateauCheck: return "plateau";
    case ExperimentKind::KernelApproxDecay: return "kernel_approx_decay";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "heatmap") return ExperimentKind::Heatmap;
  if (name == "rate_sweep" || name == "rate-sweep") return ExperimentKind::RateSweep;
  if (name == "plateau" || name == "plateau_check") return ExperimentKind::PlateauCheck;
  if (name == "kernel_approx_decay" || name == "kernel-decay")
    return ExperimentKind::KernelApproxDecay;
  throw InvalidArgument("unknown experiment '" + name + "'");
}

ExperimentPlan default_plan(ExperimentKind kind) {
  ExperimentPlan p;
  p.experiment = kind;
  switch (kind) {
    case ExperimentKind::Heatmap:
      p.M_grid = {10, 25, 50, 100, 283, 500, 1000, 1414};
      break;
    case ExperimentKind::PlateauCheck:
      p.repetitions = 20;
      break;
    case ExperimentKind::RateSweep:
      p.repetitions = 20;
      p.n_grid = {512, 1024, 2048, 4096, 8192, 16384};
      p.T_grid.clear();
      p.data.source = "designer";
      p.model.feature = FeatureKind::DesignerSampled;
      p.n_test = 0;
      break;
    case ExperimentKind::KernelApproxDecay:
      p.repetitions = 50;
      p.n_grid.clear();
      p.T_grid.clear();
      p.M_grid = {256, 1024};
      p.n_test = 0;
      p.model.feature = FeatureKind::GaussianRFF;
      break;
  }
  return p;
}

namespace {

json csv_to_json(const CsvOptions& o) {
  json j;
  j["label_column"] = o.label_column;
  j["delimiter"] = std::string(1, o.delimiter);
  j["header"] = o.header;
  j["max_rows"] = o.max_rows ? json(*o.max_rows) : json(nullptr);
  j["feature_columns"] = o.feature_columns;
  j["expected_dim"] = o.expected_dim ? json(*o.expected_dim) : json(nullptr);
  j["standardize"] = o.standardize;
  j["train_rows"] = o.train_rows ? json(*o.train_rows) : json(nullptr);
  return j;
}

CsvOptions csv_from_json(const json& j, CsvOptions o) {
  o.label_column = j.value("label_column", o.label_column);
  if (j.contains("delimiter")) {
    const auto d = j.at("delimiter").get<std::string>();
    if (d.size() != 1) throw InvalidArgument("plan: csv delimiter must be one character");
    o.delimiter = d[0];
  }
  o.header = j.value("header", o.header);
  if (j.contains("max_rows") && !j.at("max_rows").is_null())
    o.max_rows = j.at("max_rows").get<std::size_t>();
  o.feature_columns = j.value("feature_columns", o.feature_columns);
  if (j.contains("expected_dim") && !j.at("expected_dim").is_null())
    o.expected_dim = j.at("expected_dim").get<int>();
  o.standardize = j.value("standardize", o.standardize);
  if (j.contains("train_rows") && !j.at("train_rows").is_null())
    o.train_rows = j.at("train_rows").get<std::size_t>();
  return o;
}

}  // namespace

json plan_to_json(const ExperimentPlan& p) {
  json j;
  j["experiment"] = to_string(p.experiment);
  j["seed"] = p.seed;
  j["repetitions"] = p.repetitions;
  j["n_grid"] = p.n_grid;
  j["M_grid"] = p.M_grid;
  j["T_grid"] = p.T_grid;
  j["lambda_grid"] = p.lambda_grid;
  j["n_test"] = p.n_test;
  j["data"] = {{"source", p.data.source},
               {"input_dim", p.data.input_dim},
               {"csv_path", p.data.csv_path},
               {"csv", csv_to_json(p.data.csv)}};
  j["designer"] = {{"rank", p.designer.rank},         {"b", p.designer.b},
                   {"r", p.designer.r},               {"R", p.designer.R},
                   {"noise_std", p.designer.noise_std}, {"source_decay", p.designer.source_decay}};
  j["model"] = {{"feature", to_string(p.model.feature)},
                {"bandwidth", p.model.bandwidth},
                {"activation", to_string(p.model.ntk.activation)},
                {"tau", p.model.ntk.tau},
                {"gamma", p.model.ntk.gamma},
                {"input_radius", p.model.ntk.input_radius},
                {"filter", to_string(p.model.filter)},
                {"step", p.model.step ? json(*p.model.step) : json(nullptr)},
                {"momentum", p.model.momentum}};
  j["schedule"] = {{"C_lambda", p.schedule.C_lambda}, {"C_M", p.schedule.C_M},
                   {"r", p.schedule.r},               {"b", p.schedule.b},
                   {"delta", p.schedule.delta}};
  j["plateau"] = {{"low_factor", p.plateau.low_factor},
                  {"high_factor", p.plateau.high_factor},
                  {"tolerance", p.plateau.tolerance},
                  {"min_repetitions", p.plateau.min_repetitions}};
  j["kernel_decay"] = {{"bandwidth", p.kernel_decay.bandwidth},
                       {"distance", p.kernel_decay.distance},
                       {"input_dim", p.kernel_decay.input_dim},
                       {"ratio_low", p.kernel_decay.ratio_low},
                       {"ratio_high", p.kernel_decay.ratio_high}};
  j["slope_tolerance"] = p.slope_tolerance ? json(*p.slope_tolerance) : json(nullptr);
  j["write_summary"] = p.write_summary;
  return j;
}

ExperimentPlan plan_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("plan: expected a JSON object");
  if (!j.contains("experiment")) throw InvalidArgument("plan: missing 'experiment'");
  ExperimentPlan p = default_plan(experiment_kind_from_string(j.at("experiment").get<std::string>()));
  p.seed = j.value("seed", p.seed);
  p.repetitions = j.value("repetitions", p.repetitions);
  p.n_grid = j.value("n_grid", p.n_grid);
  p.M_grid = j.value("M_grid", p.M_grid);
  p.T_grid = j.value("T_grid", p.T_grid);
  p.lambda_grid = j.value("lambda_grid", p.lambda_grid);
  p.n_test = j.value("n_test", p.n_test);
  if (j.contains("data")) {
    const auto& d = j.at("data");
    p.data.source = d.value("source", p.data.source);
    p.data.input_dim = d.value("input_dim", p.data.input_dim);
    p.data.csv_path = d.value("csv_path", p.data.csv_path);
    if (d.contains("csv")) p.data.csv = csv_from_json(d.at("csv"), p.data.csv);
  }
  if (j.contains("designer")) {
    const auto& d = j.at("designer");
    p.designer.rank = d.value("rank", p.designer.rank);
    p.designer.b = d.value("b", p.designer.b);
    p.designer.r = d.value("r", p.designer.r);
    p.designer.R = d.value("R", p.designer.R);
    p.designer.noise_std = d.value("noise_std", p.designer.noise_std);
    p.designer.source_decay = d.value("source_decay", p.designer.source_decay);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (m.contains("feature"))
      p.model.feature = feature_kind_from_string(m.at("feature").get<std::string>());
    p.model.bandwidth = m.value("bandwidth", p.model.bandwidth);
    if (m.contains("activation"))
      p.model.ntk.activation = activation_from_string(m.at("activation").get<std::string>());
    p.model.ntk.tau = m.value("tau", p.model.ntk.tau);
    p.model.ntk.gamma = m.value("gamma", p.model.ntk.gamma);
    p.model.ntk.input_radius = m.value("input_radius", p.model.ntk.input_radius);
    if (m.contains("filter"))
      p.model.filter = filter_kind_from_string(m.at("filter").get<std::string>());
    if (m.contains("step") && !m.at("step").is_null()) p.model.step = m.at("step").get<double>();
    p.model.momentum = m.value("momentum", p.model.momentum);
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    p.schedule.C_lambda = s.value("C_lambda", p.schedule.C_lambda);
    p.schedule.C_M = s.value("C_M", p.schedule.C_M);
    p.schedule.r = s.value("r", p.schedule.r);
    p.schedule.b = s.value("b", p.schedule.b);
    p.schedule.delta = s.value("delta", p.schedule.delta);
  }
  if (j.contains("plateau")) {
    const auto& s = j.at("plateau");
    p.plateau.low_factor = s.value("low_factor", p.plateau.low_factor);
    p.plateau.high_factor = s.value("high_factor", p.plateau.high_factor);
    p.plateau.tolerance = s.value("tolerance", p.plateau.tolerance);
    p.plateau.min_repetitions = s.value("min_repetitions", p.plateau.min_repetitions);
  }
  if (j.contains("kernel_decay")) {
    const auto& s = j.at("kernel_decay");
    p.kernel_decay.bandwidth = s.value("bandwidth", p.kernel_decay.bandwidth);
    p.kernel_decay.distance = s.value("distance", p.kernel_decay.distance);
    p.kernel_decay.input_dim = s.value("input_dim", p.kernel_decay.input_dim);
    p.kernel_decay.ratio_low = s.value("ratio_low", p.kernel_decay.ratio_low);
    p.kernel_decay.ratio_high = s.value("ratio_high", p.kernel_decay.ratio_high);
  }
  if (j.contains("slope_tolerance") && !j.at("slope_tolerance").is_null())
    p.slope_tolerance = j.at("slope_tolerance").get<double>();
  p.write_summary = j.value("write_summary", p.write_summary);
  return p;
}

int anchor_columns(std::size_t n, int input_dim, double factor) {
  const double v = std::round(factor * std::sqrt(static_cast<double>(n)) * input_dim);
  return std::max(1, static_cast<int>(v));
}

void validate_plan(const ExperimentPlan& p) {
  if (p.repetitions < 1) throw InvalidArgument("plan: repetitions must be >= 1");
  if (p.repetitions >= (1 << 16)) throw InvalidArgument("plan: too many repetitions");
  for (int M : p.M_grid)
    if (M < 1) throw InvalidArgument("plan: M-grid entries must be >= 1");
  for (int T : p.T_grid)
    if (T < 1) throw InvalidArgument("plan: T-grid entries must be >= 1");
  for (std::size_t n : p.n_grid)
    if (n < 1) throw InvalidArgument("plan: n-grid entries must be >= 1");
  if (p.data.source != "normal" && p.data.source != "designer" && p.data.source != "csv")
    throw InvalidArgument("plan: unknown data source '" + p.data.source + "'");
  if (p.data.input_dim < 1) throw InvalidArgument("plan: input_dim must be >= 1");

  switch (p.experiment) {
    case ExperimentKind::Heatmap:
    case ExperimentKind::PlateauCheck:
      if (p.n_grid.size() != 1) throw InvalidArgument("plan: heatmap needs exactly one n");
      if (p.T_grid.empty()) throw InvalidArgument("plan: T-grid is empty");
      if (p.experiment == ExperimentKind::Heatmap && p.M_grid.empty())
        throw InvalidArgument("plan: M-grid is empty");
      if (p.n_test < 1) throw InvalidArgument("plan: heatmap needs n_test >= 1");
      if (p.model.filter != FilterKind::Landweber && p.model.filter != FilterKind::Heavyball)
        throw InvalidArgument("plan: heatmap needs an iterative filter");
      break;
    case ExperimentKind::RateSweep: {
      if (p.n_grid.size() < 5) throw InvalidArgument("plan: rate sweep needs >= 5 n values");
      if (p.data.source != "designer")
        throw InvalidArgument("plan: rate sweep needs a designer problem");
      if (p.model.feature != FeatureKind::DesignerSampled &&
          p.model.feature != FeatureKind::DesignerFiniteRank)
        throw InvalidArgument("plan: rate sweep needs a designer feature map");
      if (!p.lambda_grid.empty() && p.lambda_grid.size() != p.n_grid.size())
        throw InvalidArgument("plan: lambda_grid must match n_grid in length");
      for (std::size_t i = 1; i < p.n_grid.size(); ++i)
        if (p.n_grid[i] <= p.n_grid[i - 1])
          throw InvalidArgument("plan: n-grid must be increasing");
      const std::size_t n0 = min_sample_size(p.schedule.r, p.schedule.b);
      for (std::size_t n : p.n_grid)
        if (n < n0)
          throw InvalidArgument("plan: n = " + std::to_string(n) + " is below n0 = " +
                                std::to_string(n0));
      break;
    }
    case ExperimentKind::KernelApproxDecay:
      if (p.M_grid.size() < 2) throw InvalidArgument("plan: kernel decay needs >= 2 M values");
      if (p.kernel_decay.input_dim < 1 || !(p.kernel_decay.bandwidth > 0.0))
        throw InvalidArgument("plan: invalid kernel decay probe");
      break;
  }
}

}  // namespace rfsr::harness
