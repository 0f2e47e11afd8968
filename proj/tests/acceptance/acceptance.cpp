// Acceptance checks, one line per criterion. Exit status is nonzero if any
// selected criterion fails.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles/oracles.hpp"
#include "rfsr/diagnostics.hpp"
#include "rfsr/estimator.hpp"
#include "rfsr/feature_map.hpp"
#include "rfsr/harness/experiments.hpp"
#include "rfsr/harness/output.hpp"
#include "rfsr/harness/plan.hpp"
#include "rfsr/kernel_oracles.hpp"
#include "rfsr/spectral_filter.hpp"

using namespace rfsr;
using namespace rfsr::harness;

namespace {

// Pinned tolerances.
constexpr double kPathTol = 1e-8;
constexpr double kDualTol = 1e-6;
constexpr double kDimSlopeTol = 0.1;
constexpr double kRateSlopeTol = 0.15;
constexpr double kPlateauTol = 0.05;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Outcome criterion_filters() {
  std::vector<SpectralFilter> filters = {
      SpectralFilter::tikhonov(), SpectralFilter::spectral_cutoff(),
      SpectralFilter::default_landweber(1.0), SpectralFilter::default_heavyball(1.0)};
  bool ok = true;
  std::string detail;
  for (const auto& f : filters) {
    const auto report = audit_filter(f);
    ok = ok && report.pass;
    detail += f.name() + (report.pass ? "=pass " : "=fail ");
    if (f.kind() == FilterKind::Tikhonov) {
      const auto* q2 = report.entry(2.0);
      const bool saturates = q2 && !q2->bounded;
      ok = ok && saturates;
      detail += saturates ? "(q=2 unbounded) " : "(q=2 bounded?) ";
    }
    if (f.kind() == FilterKind::SpectralCutoff || f.kind() == FilterKind::Landweber) {
      for (double q : {0.5, 1.0, 2.0, 4.0}) {
        const auto* e = report.entry(q);
        if (!e || !e->bounded) {
          ok = false;
          detail += fmt("(q=%g unbounded) ", q);
        }
      }
    }
  }
  return {ok, detail};
}

Outcome criterion_paths() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> n_dist(20, 200), d_dist(1, 4);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = n_dist(rng);
    const int d = d_dist(rng);
    const int M = std::max(2, 50 / (d + 2));
    Matrix X(n, d);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < d; ++c) X(i, c) = normal(rng) / std::sqrt(static_cast<double>(d));
      y(i) = std::sin(X(i, 0)) + 0.1 * normal(rng);
    }
    NtkParams ntk;
    ntk.activation = trial % 2 ? Activation::Tanh : Activation::Relu;
    const auto map = FeatureMap::sample(FeatureKind::NtkOneLayer, d, M, ntk, 100 + trial);
    const auto ops = assemble_empirical_operators(map, X, y);
    const double k2 = map.kappa_sq();
    const int T = 10 + 17 * trial;
    for (const auto& f : {SpectralFilter::default_landweber(k2), SpectralFilter::default_heavyball(k2)}) {
      const Vector a = iterate(ops, f, T).theta;
      const Vector b = spectral_solution_iterations(ops, f, T);
      worst = std::max(worst, (a - b).norm() / std::max(b.norm(), 1e-300));
    }
  }
  return {worst <= kPathTol, fmt("max relative |theta_iter - theta_spec| = %.3g (tol %.0e)", worst, kPathTol)};
}

Outcome criterion_dual() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 30 + 9 * trial;
    const int d = 1 + trial % 3;
    const int M = 5 + trial;
    const double lambda = std::pow(10.0, -1.0 - 0.15 * trial);
    Matrix X(n, d), Xt(25, d);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < d; ++c) X(i, c) = normal(rng);
      y(i) = X(i, 0) - 0.5 * X(i, d - 1) * X(i, d - 1) + 0.2 * normal(rng);
    }
    for (int i = 0; i < Xt.rows(); ++i)
      for (int c = 0; c < d; ++c) Xt(i, c) = normal(rng);
    const auto map = FeatureMap::sample(FeatureKind::GaussianRFF, d, M, GaussianRffParams{1.0 + 0.1 * trial},
                                        500 + trial);
    const auto primal = fit_spectral(map, X, y, SpectralFilter::tikhonov(), lambda);
    const auto dual = krr_gram_fit(ExactKernel::monte_carlo(map), X, y, lambda);
    const Vector p = primal.predict(Xt), q = dual.predict(Xt);
    worst = std::max(worst, (p - q).cwiseAbs().maxCoeff() / std::max(1.0, q.cwiseAbs().maxCoeff()));
  }
  return {worst <= kDualTol, fmt("max relative prediction gap = %.3g (tol %.0e)", worst, kDualTol)};
}

Outcome criterion_kernel_decay() {
  const auto r = run_kernel_approx_decay(default_plan(ExperimentKind::KernelApproxDecay));
  const auto& ratio = r.summary["ratios"][0];
  return {r.pass.value_or(false),
          fmt("median |K_M - K| ratio M=256->1024 = %.3f (band [1.6, 2.5], std ratio %.3f)",
              ratio["median_ratio"].get<double>(), ratio["std_ratio"].get<double>())};
}

Outcome criterion_effective_dimension() {
  bool ok = true;
  std::string detail;
  const auto lambdas = oracle::logspace(1e-4, 1e-1, 31);
  for (double b : {0.5, 1.0}) {
    const auto mu = power_law_spectrum(512, b);
    std::vector<double> lx, ly;
    for (double l : lambdas) {
      lx.push_back(std::log(l));
      ly.push_back(std::log(effective_dimension(mu, l)));
    }
    const double slope = ols_fit(lx, ly).slope;
    const bool within = std::abs(slope + b) <= kDimSlopeTol;
    ok = ok && within;
    detail += fmt("b=%g slope=%.4f", b, slope) + (within ? " ok; " : " outside +-0.1; ");
  }
  return {ok, detail};
}

Outcome criterion_bias() {
  bool ok = true;
  double worst = 0.0;
  const auto lambdas = oracle::logspace(1e-4, 1e-1, 20);
  for (double r : {0.5, 1.0}) {
    const auto problem = make_designer_problem(512, 1.0, r, 1.0, 0.5, 3);
    const auto map = problem.exact_map();
    const double q = std::max(r, 1.0);
    AuditGrid grid;
    grid.orders.push_back(q);
    for (const auto& f : {SpectralFilter::default_landweber(map.kappa_sq()), SpectralFilter::spectral_cutoff()}) {
      const auto* entry = audit_filter(f, grid).entry(q);
      if (!entry || !entry->bounded) {
        ok = false;
        continue;
      }
      for (double l : lambdas) {
        const double bias = compute_f_star(problem, map, f, l).bias;
        const double bound = bias_bound(problem, entry->measured, l);
        worst = std::max(worst, bias / bound);
        ok = ok && bias <= bound;
      }
    }
  }
  return {ok, fmt("max bias / (3 R c_q lambda^r) = %.3f over 80 points", worst)};
}

Outcome criterion_rate(const RunOptions& options) {
  ExperimentPlan p = default_plan(ExperimentKind::RateSweep);
  p.schedule.C_M = 1.0;
  p.slope_tolerance = kRateSlopeTol;
  const auto r = run_rate_sweep(p, options);
  if (r.summary["degenerate"].get<bool>()) return {false, "degenerate risks"};
  return {r.pass.value_or(false),
          fmt("slope = %.4f +- %.4f, target %.2f (tol 0.15)", r.summary["slope"].get<double>(),
              r.summary["slope_standard_error"].get<double>(), r.summary["target_slope"].get<double>())};
}

Outcome criterion_plateau(const RunOptions& options) {
  ExperimentPlan p = default_plan(ExperimentKind::PlateauCheck);
  p.repetitions = 20;
  p.T_grid = {1, 3, 10, 30, 100, 300, 1000, 3000};
  p.plateau.tolerance = kPlateauTol;
  const auto r = run_plateau_check(p, options);
  const auto& s = r.summary;
  return {r.pass.value_or(false),
          fmt("best mse M=283: %.5f, M=1414: %.5f, ratio %.4f (tol 1.05)",
              s["low"]["mean_test_mse"].get<double>(), s["high"]["mean_test_mse"].get<double>(),
              s["ratio"].get<double>())};
}

Outcome criterion_workers() {
  ExperimentPlan rate = default_plan(ExperimentKind::RateSweep);
  rate.n_grid = {512, 1024, 2048, 4096, 8192};
  rate.repetitions = 4;
  rate.schedule.C_M = 1.0;
  ExperimentPlan plateau = default_plan(ExperimentKind::PlateauCheck);
  plateau.n_grid = {1000};
  plateau.n_test = 1000;
  plateau.repetitions = 10;
  plateau.T_grid = {1, 10, 100};
  RunOptions one, three;
  three.workers = 3;
  const bool same_rate = results_csv(run_rate_sweep(rate, one).rows) ==
                         results_csv(run_rate_sweep(rate, three).rows);
  const bool same_plateau = results_csv(run_plateau_check(plateau, one).rows) ==
                            results_csv(run_plateau_check(plateau, three).rows);
  return {same_rate && same_plateau,
          std::string("rate sweep ") + (same_rate ? "identical" : "differs") + ", plateau " +
              (same_plateau ? "identical" : "differs") + " (workers 1 vs 3)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> selected;
  int workers = 1;
  app.add_option("--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--workers", workers, "worker threads for the experiment criteria")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  RunOptions options;
  options.workers = workers;
  const std::vector<std::function<Outcome()>> checks = {
      criterion_filters,
      criterion_paths,
      criterion_dual,
      criterion_kernel_decay,
      criterion_effective_dimension,
      criterion_bias,
      [&] { return criterion_rate(options); },
      [&] { return criterion_plateau(options); },
      criterion_workers,
  };

  bool all = true;
  for (int k : selected) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s %s [%.1fs]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 2;
}
