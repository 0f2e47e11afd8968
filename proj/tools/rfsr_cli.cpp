// rfsr: command-line front end for fits, experiments, filter audits and
// designer-problem diagnostics.
//
// Exit codes: 0 success, 2 an acceptance check failed, 1 execution error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rfsr/diagnostics.hpp"
#include "rfsr/errors.hpp"
#include "rfsr/estimator.hpp"
#include "rfsr/harness/experiments.hpp"
#include "rfsr/harness/output.hpp"
#include "rfsr/model_io.hpp"
#include "rfsr/spectral_filter.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rfsr;
using namespace rfsr::harness;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 2;
constexpr int kError = 1;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out_dir = "out";
  bool quiet = false;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config '" + path + "': " + e.what());
  }
}

json config_or_empty(const CommonFlags& f) { return f.config.empty() ? json::object() : read_json(f.config); }

RunOptions run_options(const CommonFlags& f) {
  static std::mutex log_mutex;
  RunOptions o;
  o.workers = f.workers;
  if (!f.quiet)
    o.log = [](const std::string& msg) {
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << msg << "\n";
    };
  return o;
}

ExperimentPlan load_plan(const CommonFlags& f, ExperimentKind kind) {
  json j = config_or_empty(f);
  if (j.contains("experiment") &&
      experiment_kind_from_string(j.at("experiment").get<std::string>()) != kind)
    throw InvalidArgument("config describes a '" + j.at("experiment").get<std::string>() +
                          "' plan, not '" + to_string(kind) + "'");
  j["experiment"] = to_string(kind);
  ExperimentPlan plan = plan_from_json(j);
  if (f.seed) plan.seed = *f.seed;
  return plan;
}

int run_plan(const CommonFlags& f, ExperimentKind kind) {
  const ExperimentPlan plan = load_plan(f, kind);
  const ExperimentResult result = run_experiment(plan, run_options(f));
  write_outputs(f.out_dir, plan, result);
  std::cout << result.summary.dump(2) << "\n";
  if (result.pass) {
    std::cout << (*result.pass ? "PASS" : "FAIL") << "\n";
    return *result.pass ? kOk : kCheckFailed;
  }
  return kOk;
}

// fit: one model from a plan-like config with scalar n, n_test, M and either
// lambda (spectral path) or T (iterative path).
int run_fit(const CommonFlags& f) {
  json j = config_or_empty(f);
  json plan_json = j;
  plan_json["experiment"] = "heatmap";
  const std::size_t n = j.value("n", std::size_t{1000});
  const std::size_t n_test = j.value("n_test", std::size_t{1000});
  const int M = j.value("M", 100);
  plan_json["n_grid"] = {n};
  plan_json["n_test"] = n_test;
  plan_json["M_grid"] = {M};
  ExperimentPlan plan = plan_from_json(plan_json);
  if (f.seed) plan.seed = *f.seed;
  const FitPath path = fit_path_from_string(j.value("path", std::string("spectral")));

  const SplitData data = heatmap_data(plan, 0);
  std::unique_ptr<DesignerProblem> problem;
  if (plan.model.feature == FeatureKind::DesignerFiniteRank ||
      plan.model.feature == FeatureKind::DesignerSampled || plan.data.source != "csv")
    problem = std::make_unique<DesignerProblem>(plan_problem(plan));
  const FeatureMap map =
      FeatureMap::sample(plan.model.feature, static_cast<int>(data.X_train.cols()), M,
                         plan_feature_params(plan, problem.get()), plan.seed);
  const double kappa_hat = map.feature_matrix(data.X_train).rowwise().squaredNorm().maxCoeff();
  const SpectralFilter filter = plan_filter(plan.model, kappa_hat);

  std::optional<RfModel> model;
  std::vector<double> losses;
  if (path == FitPath::Iterative) {
    if (!j.contains("T")) throw InvalidArgument("fit: iterative path needs 'T'");
    IterativeOptions it;
    it.record_losses = true;
    auto fit = fit_iterative(map, data.X_train, data.y_train, filter, j.at("T").get<int>(), it);
    losses = std::move(fit.training_losses);
    model.emplace(std::move(fit.model));
  } else {
    double lambda = 0.0;
    if (j.contains("lambda"))
      lambda = j.at("lambda").get<double>();
    else if (j.contains("T") && filter.is_iterative())
      lambda = filter.lambda_for_iterations(j.at("T").get<int>());
    else
      throw InvalidArgument("fit: spectral path needs 'lambda' (or 'T' for an iterative filter)");
    model.emplace(fit_spectral(map, data.X_train, data.y_train, filter, lambda));
  }

  fs::create_directories(f.out_dir);
  save_model(*model, fs::path(f.out_dir) / "model.json");
  const double train = mse(*model, data.X_train, data.y_train);
  const double test = data.X_test.rows() > 0 ? mse(*model, data.X_test, data.y_test) : NAN;
  const int T = model->iterations().value_or(0);
  ExperimentResult result;
  result.rows = {{n, M, T, model->lambda(), 0, "train_mse", train},
                 {n, M, T, model->lambda(), 0, "test_mse", test}};
  result.summary = {{"command", "fit"},
                    {"fit_path", to_string(model->fit_path())},
                    {"filter", filter.descriptor()},
                    {"lambda", model->lambda()},
                    {"iterations", model->iterations() ? json(*model->iterations()) : json(nullptr)},
                    {"train_mse", train},
                    {"test_mse", test},
                    {"model", (fs::path(f.out_dir) / "model.json").string()}};
  if (!losses.empty()) result.summary["final_training_loss"] = losses.back();
  if (problem && (map.kind() == FeatureKind::DesignerFiniteRank ||
                  map.kind() == FeatureKind::DesignerSampled) &&
      plan.data.source == "designer") {
    const ExcessRisk risk = excess_risk_exact(*problem, *model);
    result.summary["excess_risk"] = {
        {"total", risk.total}, {"bias", risk.bias}, {"variance", risk.variance}};
  }
  plan.experiment = ExperimentKind::Heatmap;
  write_outputs(f.out_dir, plan, result);
  std::cout << result.summary.dump(2) << "\n";
  return kOk;
}

SpectralFilter audit_filter_from(const std::string& name, const json& cfg) {
  const FilterKind kind = filter_kind_from_string(name);
  const double kappa_sq = cfg.value("kappa_sq", 1.0);
  switch (kind) {
    case FilterKind::Tikhonov: return SpectralFilter::tikhonov();
    case FilterKind::SpectralCutoff: return SpectralFilter::spectral_cutoff();
    case FilterKind::Landweber:
      return cfg.contains("step") ? SpectralFilter::landweber(cfg.at("step").get<double>())
                                  : SpectralFilter::default_landweber(kappa_sq);
    case FilterKind::Heavyball:
      return cfg.contains("step") ? SpectralFilter::heavyball(cfg.at("step").get<double>(),
                                                              cfg.value("momentum", 0.9))
                                  : SpectralFilter::default_heavyball(kappa_sq);
  }
  throw InvalidArgument("unknown filter");
}

// audit-filters: config {filters: [...], grid: {...}, step, momentum, kappa_sq}.
int run_audit(const CommonFlags& f) {
  const json cfg = config_or_empty(f);
  AuditGrid grid;
  if (cfg.contains("grid")) {
    const auto& g = cfg.at("grid");
    grid.t_points = g.value("t_points", grid.t_points);
    grid.lambda_points = g.value("lambda_points", grid.lambda_points);
    grid.t_min = g.value("t_min", grid.t_min);
    grid.lambda_min = g.value("lambda_min", grid.lambda_min);
    grid.orders = g.value("orders", grid.orders);
  }
  const std::vector<std::string> names = cfg.value(
      "filters", std::vector<std::string>{"tikhonov", "landweber", "heavyball", "spectral_cutoff"});
  json reports = json::array();
  ExperimentResult result;
  bool all_pass = true;
  for (const auto& name : names) {
    const AuditReport report = audit_filter(audit_filter_from(name, cfg), grid);
    reports.push_back(report.to_json());
    all_pass = all_pass && report.pass;
    const auto& m = report.measured;
    for (const auto& [metric, value] :
         {std::pair{"D_measured", m.D}, {"E_measured", m.E}, {"c0_measured", m.c0}})
      result.rows.push_back({0, 0, 0, NAN, 0, report.filter + ":" + metric, value});
    for (const auto& e : report.qualification)
      result.rows.push_back(
          {0, 0, 0, NAN, 0, report.filter + ":c_q=" + format_double(e.order), e.measured});
  }
  fs::create_directories(f.out_dir);
  write_text(fs::path(f.out_dir) / "audit.json", reports.dump(2) + "\n");
  write_text(fs::path(f.out_dir) / "results.csv", results_csv(result.rows));
  result.summary = {{"command", "audit-filters"}, {"reports", reports}, {"pass", all_pass}};
  write_text(fs::path(f.out_dir) / "summary.json", result.summary.dump(2) + "\n");
  write_text(fs::path(f.out_dir) / "plan.resolved.json",
             json{{"command", "audit-filters"},
                  {"filters", names},
                  {"grid",
                   {{"t_points", grid.t_points},
                    {"lambda_points", grid.lambda_points},
                    {"t_min", grid.t_min},
                    {"lambda_min", grid.lambda_min},
                    {"orders", grid.orders}}}}
                     .dump(2) +
                 "\n");
  std::cout << reports.dump(2) << "\n" << (all_pass ? "PASS" : "FAIL") << "\n";
  return all_pass ? kOk : kCheckFailed;
}

// diagnose: effective dimension, bias and sup-norm bounds on a designer
// problem over a lambda grid, plus the random-vs-exact effective dimension
// comparison when M is given.
int run_diagnose(const CommonFlags& f) {
  json cfg = config_or_empty(f);
  json plan_json = cfg;
  plan_json["experiment"] = "heatmap";
  if (!cfg.contains("designer")) plan_json["designer"] = {{"rank", 512}};
  ExperimentPlan plan = plan_from_json(plan_json);
  if (f.seed) plan.seed = *f.seed;
  const DesignerProblem problem = plan_problem(plan);
  const std::size_t points = cfg.value("lambda_points", std::size_t{20});
  const double lo = cfg.value("lambda_min", 1e-4);
  const double hi = cfg.value("lambda_max", 1e-1);
  const std::vector<std::string> filters =
      cfg.value("filters", std::vector<std::string>{"landweber", "spectral_cutoff"});
  const std::optional<int> M =
      cfg.contains("M") ? std::optional<int>(cfg.at("M").get<int>()) : std::nullopt;
  const FeatureMap map = M ? problem.sampled_map(*M, plan.seed) : problem.exact_map();

  std::vector<DiagnosticRecord> records;
  const double q = std::max(problem.r, 1.0);
  AuditGrid grid;
  grid.orders.push_back(q);
  for (std::size_t i = 0; i < points; ++i) {
    const double frac = points > 1 ? static_cast<double>(i) / (points - 1) : 0.0;
    const double lambda = lo * std::pow(hi / lo, frac);
    records.push_back({"effective_dimension", lambda,
                       effective_dimension(problem.eigenvalues, lambda), NAN, "monitored"});
  }
  for (const auto& name : filters) {
    const SpectralFilter filter = audit_filter_from(name, json{{"kappa_sq", map.kappa_sq()}});
    const AuditReport audit = audit_filter(filter, grid);
    const QualificationEntry* entry = audit.entry(q);
    for (std::size_t i = 0; i < points; ++i) {
      const double frac = points > 1 ? static_cast<double>(i) / (points - 1) : 0.0;
      const double lambda = lo * std::pow(hi / lo, frac);
      const FStar fs_ = compute_f_star(problem, map, filter, lambda);
      const double bound = bias_bound(problem, entry->measured, lambda);
      const bool ok = entry->bounded && fs_.bias <= bound;
      records.push_back({filter.name() + ":bias", lambda, fs_.bias, bound, ok ? "pass" : "fail"});
      const SupNormReport sup = sup_norm_f_star(problem, map, filter, lambda);
      records.push_back(
          {filter.name() + ":sup_norm", lambda, sup.value, sup.bound, sup.within ? "pass" : "fail"});
    }
  }
  if (M) {
    const Dataset probe = sample_dataset(problem, cfg.value("probe_points", std::size_t{1000}),
                                         plan.seed ^ 0xA5A5A5A5ULL);
    for (std::size_t i = 0; i < points; ++i) {
      const double frac = points > 1 ? static_cast<double>(i) / (points - 1) : 0.0;
      const double lambda = lo * std::pow(hi / lo, frac);
      const auto cmp = effective_dimension_comparison(map, problem.kernel(), probe.X, lambda);
      const std::string status = cmp.status == ComparisonStatus::Ok        ? "pass"
                                 : cmp.status == ComparisonStatus::Flagged ? "fail"
                                                                           : "monitored";
      records.push_back({"effective_dimension_ratio", lambda, cmp.ratio, cmp.threshold, status});
    }
  }

  json out = json::array();
  ExperimentResult result;
  bool pass = true;
  for (const auto& r : records) {
    out.push_back(r.to_json());
    pass = pass && r.status != "fail";
    result.rows.push_back({0, map.num_samples(), 0, r.lambda, 0, r.quantity, r.value});
  }
  fs::create_directories(f.out_dir);
  write_text(fs::path(f.out_dir) / "diagnostics.json", out.dump(2) + "\n");
  result.summary = {{"command", "diagnose"}, {"records", out}, {"pass", pass}};
  write_outputs(f.out_dir, plan, result);
  std::cout << out.dump(2) << "\n" << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kOk : kCheckFailed;
}

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "JSON plan or command config");
  sub->add_option("--seed", f.seed, "Base seed (overrides the config)");
  sub->add_option("--workers", f.workers, "Concurrent trials")->check(CLI::PositiveNumber);
  sub->add_option("--out-dir", f.out_dir, "Output directory");
  sub->add_flag("--quiet", f.quiet, "No progress messages");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral regularization with random features"};
  app.require_subcommand(1);
  CommonFlags flags;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"fit", "Fit one model and write model.json"},
      {"heatmap", "M x T test-error heatmap"},
      {"rate-sweep", "Excess-risk rate over an n-grid with scheduled lambda and M"},
      {"plateau", "Check that the error plateaus past M ~ sqrt(n) d"},
      {"kernel-decay", "Monte Carlo kernel approximation error versus M"},
      {"audit-filters", "Measure filter constants and qualification"},
      {"diagnose", "Effective dimension and bias bounds on a designer problem"},
  };
  for (const auto& s : subs) add_common(app.add_subcommand(s.name, s.help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "fit") return run_fit(flags);
    if (cmd == "heatmap") return run_plan(flags, ExperimentKind::Heatmap);
    if (cmd == "rate-sweep") return run_plan(flags, ExperimentKind::RateSweep);
    if (cmd == "plateau") return run_plan(flags, ExperimentKind::PlateauCheck);
    if (cmd == "kernel-decay") return run_plan(flags, ExperimentKind::KernelApproxDecay);
    if (cmd == "audit-filters") return run_audit(flags);
    if (cmd == "diagnose") return run_diagnose(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
