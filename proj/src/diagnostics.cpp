#include "rfsr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "rfsr/errors.hpp"

namespace rfsr {

namespace {

bool is_designer(FeatureKind kind) {
  return kind == FeatureKind::DesignerFiniteRank || kind == FeatureKind::DesignerSampled;
}

void check_designer_map(const DesignerProblem& problem, const FeatureMap& map) {
  if (!is_designer(map.kind()))
    throw InvalidArgument("designer diagnostics: feature map is not a designer map");
  const auto& params = std::get<DesignerParams>(map.params());
  if (params.eigenvalues != problem.eigenvalues)
    throw InvalidArgument("designer diagnostics: feature map spectrum differs from the problem");
}

double sup_effective_dimension_constant(const std::vector<double>& mu, double b) {
  double best = 0.0;
  for (int k = 0; k <= 240; ++k) {
    const double lambda = std::pow(10.0, -8.0 + 12.0 * k / 240.0);
    best = std::max(best, effective_dimension(mu, lambda) * std::pow(lambda, b));
  }
  return best;
}

FStar f_star_from_spectrum(const DesignerProblem& problem, const Vector& spectrum,
                           const SpectralFilter& filter, double lambda,
                           std::optional<int> iterations) {
  FStar out;
  out.coefficients.resize(problem.rank());
  for (int j = 0; j < problem.rank(); ++j) {
    const double t = spectrum(j);
    const double phi = iterations ? filter.evaluate_iterations(t, *iterations)
                                  : filter.evaluate(t, lambda);
    out.coefficients(j) = t * phi * problem.g(j);
  }
  out.bias = (problem.g - out.coefficients).norm();
  return out;
}

}  // namespace

FeatureMap DesignerProblem::exact_map() const {
  return FeatureMap::sample(FeatureKind::DesignerFiniteRank, 1, rank(),
                            DesignerParams{eigenvalues, b}, 0);
}

FeatureMap DesignerProblem::sampled_map(int num_samples, std::uint64_t seed) const {
  return FeatureMap::sample(FeatureKind::DesignerSampled, 1, num_samples,
                            DesignerParams{eigenvalues, b}, seed);
}

double DesignerProblem::target(double x) const {
  double acc = 0.0;
  for (int j = 0; j < rank(); ++j) acc += g(j) * designer_basis(j + 1, x);
  return acc;
}

DesignerProblem make_designer_problem(int J, double b, double r, double R, double noise_std,
                                      std::uint64_t seed, const DesignerOptions& options) {
  if (J < 2) throw InvalidArgument("designer problem: rank J must be >= 2");
  if (!(b > 0.0 && b <= 1.0)) throw InvalidArgument("designer problem: b must lie in (0, 1]");
  if (!(r > 0.0)) throw InvalidArgument("designer problem: r must be positive");
  if (!(2.0 * r + b > 1.0))
    throw InvalidArgument("designer problem: hard learning regime, 2r + b = " +
                          std::to_string(2.0 * r + b) + " <= 1");
  if (!(R > 0.0)) throw InvalidArgument("designer problem: R must be positive");
  if (!(noise_std >= 0.0)) throw InvalidArgument("designer problem: noise std must be >= 0");

  DesignerProblem p;
  p.eigenvalues = options.eigenvalues.empty() ? power_law_spectrum(J, b) : options.eigenvalues;
  if (static_cast<int>(p.eigenvalues.size()) != J)
    throw InvalidArgument("designer problem: custom spectrum length differs from J");
  p.b = b;
  p.r = r;
  p.R = R;

  Vector z(J);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  for (int j = 1; j <= J; ++j) {
    z(j - 1) = std::pow(static_cast<double>(j), -options.source_decay);
    if (options.random_signs && coin(rng)) z(j - 1) = -z(j - 1);
  }
  p.h = R * z / z.norm();
  p.g.resize(J);
  for (int j = 0; j < J; ++j) p.g(j) = std::pow(p.eigenvalues[j], r) * p.h(j);

  double sup_g = 0.0;
  for (int j = 0; j < J; ++j) sup_g += std::abs(p.g(j)) * (j == 0 ? 1.0 : std::sqrt(2.0));
  p.noise = {noise_std, std::max(noise_std, sup_g), noise_std};
  p.c_b = sup_effective_dimension_constant(p.eigenvalues, b);
  return p;
}

Dataset sample_dataset(const DesignerProblem& problem, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample_dataset: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(n), 1);
  d.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) d.X(static_cast<Eigen::Index>(i), 0) = uniform(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double eps = problem.noise.std > 0.0 ? problem.noise.std * normal(rng) : 0.0;
    d.y(k) = problem.target(d.X(k, 0)) + eps;
  }
  return d;
}

double effective_dimension(std::span<const double> eigenvalues, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("effective_dimension: lambda must be positive");
  double acc = 0.0;
  for (double mu : eigenvalues) {
    if (mu < 0.0) throw InvalidArgument("effective_dimension: eigenvalues must be >= 0");
    acc += mu / (mu + lambda);
  }
  return acc;
}

Vector operator_spectrum(const DesignerProblem& problem, const FeatureMap& map) {
  check_designer_map(problem, map);
  Vector t = Vector::Zero(problem.rank());
  if (map.kind() == FeatureKind::DesignerFiniteRank) {
    for (int j = 0; j < problem.rank(); ++j) t(j) = problem.eigenvalues[j];
    return t;
  }
  const double unit = map.designer_mass() / static_cast<double>(map.num_samples());
  for (int m = 0; m < map.num_samples(); ++m) {
    const int j = static_cast<int>(map.frequencies()(m, 0));
    t(j - 1) += unit;
  }
  return t;
}

Vector fitted_coefficients(const DesignerProblem& problem, const RfModel& model) {
  const FeatureMap& map = model.map();
  check_designer_map(problem, map);
  Vector c = Vector::Zero(problem.rank());
  const bool exact = map.kind() == FeatureKind::DesignerFiniteRank;
  const double sampled_scale =
      std::sqrt(map.designer_mass() / static_cast<double>(map.num_samples()));
  for (int m = 0; m < map.num_samples(); ++m) {
    const int j = static_cast<int>(map.frequencies()(m, 0));
    const double scale = exact ? std::sqrt(problem.eigenvalues[j - 1]) : sampled_scale;
    c(j - 1) += scale * model.theta()(m);
  }
  return c;
}

FStar compute_f_star(const DesignerProblem& problem, const FeatureMap& map,
                     const SpectralFilter& filter, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw InvalidArgument("compute_f_star: lambda must lie in (0, 1]");
  return f_star_from_spectrum(problem, operator_spectrum(problem, map), filter, lambda, {});
}

FStar compute_f_star(const DesignerProblem& problem, const SpectralFilter& filter, double lambda) {
  return compute_f_star(problem, problem.exact_map(), filter, lambda);
}

ExcessRisk excess_risk_exact(const DesignerProblem& problem, const RfModel& model) {
  const Vector c = fitted_coefficients(problem, model);
  const FStar star = f_star_from_spectrum(problem, operator_spectrum(problem, model.map()),
                                          model.filter(), model.lambda(), model.iterations());
  ExcessRisk risk;
  risk.total = (problem.g - c).norm();
  risk.bias = star.bias;
  risk.variance = (star.coefficients - c).norm();
  return risk;
}

double bias_bound(const DesignerProblem& problem, double c_q, double lambda) {
  return 3.0 * problem.R * c_q * std::pow(lambda, problem.r);
}

SupNormReport sup_norm_f_star(const DesignerProblem& problem, const FeatureMap& map,
                              const SpectralFilter& filter, double lambda, int grid_points) {
  if (grid_points < 2) throw InvalidArgument("sup_norm_f_star: need at least 2 grid points");
  const FStar star = compute_f_star(problem, map, filter, lambda);
  SupNormReport report;
  for (int k = 0; k < grid_points; ++k) {
    const double x = static_cast<double>(k) / (grid_points - 1);
    double v = 0.0;
    for (int j = 0; j < problem.rank(); ++j) v += star.coefficients(j) * designer_basis(j + 1, x);
    report.value = std::max(report.value, std::abs(v));
  }
  const double kappa = std::sqrt(map.kappa_sq());
  const double exponent = std::max(0.0, 0.5 - problem.r);
  report.bound = 2.0 * std::pow(kappa, 2.0 * problem.r + 1.0) * problem.R *
                 filter.constants().D * std::pow(lambda, -exponent);
  report.within = report.value <= report.bound;
  return report;
}

std::string to_string(ComparisonStatus status) {
  switch (status) {
    case ComparisonStatus::Ok:
      return "ok";
    case ComparisonStatus::Flagged:
      return "flagged";
    case ComparisonStatus::Indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

EffectiveDimensionComparison effective_dimension_comparison(const FeatureMap& map_random,
                                                            const ExactKernel& map_ref,
                                                            const Matrix& X_probe, double lambda,
                                                            double delta, const Limits& limits) {
  if (X_probe.rows() < 500)
    throw InvalidArgument("effective_dimension_comparison: probe set needs >= 500 points");
  if (!(lambda > 0.0))
    throw InvalidArgument("effective_dimension_comparison: lambda must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidArgument("effective_dimension_comparison: delta must lie in (0, 1)");
  const auto n = static_cast<double>(X_probe.rows());

  auto dimension_of = [lambda](const Vector& eigenvalues) {
    std::vector<double> t(static_cast<std::size_t>(eigenvalues.size()));
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = std::max(0.0, eigenvalues(j));
    return effective_dimension(t, lambda);
  };

  // Nonzero spectrum of Z Z^T / n equals that of Z^T Z / n; use the smaller side.
  const Matrix Z = map_random.feature_matrix(X_probe, limits);
  Matrix small = Z.cols() < Z.rows() ? Matrix(Z.transpose() * Z / n) : Matrix(Z * Z.transpose() / n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig_random(small, Eigen::EigenvaluesOnly);
  const Matrix K_ref = map_ref.gram(X_probe, limits) / n;
  Eigen::SelfAdjointEigenSolver<Matrix> eig_ref(K_ref, Eigen::EigenvaluesOnly);
  if (eig_random.info() != Eigen::Success || eig_ref.info() != Eigen::Success)
    throw NumericalError("effective_dimension_comparison: eigensolver failed");

  EffectiveDimensionComparison out;
  out.random_dimension = dimension_of(eig_random.eigenvalues());
  out.reference_dimension = dimension_of(eig_ref.eigenvalues());
  out.threshold = 4.0 * (1.0 + 2.0 * std::log(2.0 / delta));
  if (out.random_dimension < 1e-6 || out.reference_dimension < 1e-6) {
    out.status = ComparisonStatus::Indeterminate;
    out.ratio = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.ratio = out.random_dimension / out.reference_dimension;
  out.status = out.ratio > out.threshold ? ComparisonStatus::Flagged : ComparisonStatus::Ok;
  return out;
}

nlohmann::json DiagnosticRecord::to_json() const {
  return {{"quantity", quantity}, {"lambda", lambda}, {"value", value}, {"bound", bound},
          {"status", status}};
}

}  // namespace rfsr
