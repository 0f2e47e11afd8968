#include "rfsr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>

#include <Eigen/Eigenvalues>

#include "rfsr/errors.hpp"

namespace rfsr {

namespace {

void check_spectral_dim(Eigen::Index dim, const Limits& limits) {
  if (static_cast<std::size_t>(dim) > limits.max_spectral_dim)
    throw BudgetExceeded("spectral fit: embedding dimension " + std::to_string(dim) +
                         " exceeds the eigendecomposition cap of " +
                         std::to_string(limits.max_spectral_dim));
}

Vector apply_filter(const EmpiricalOperators& ops, const Limits& limits,
                    const std::function<std::vector<double>(const std::vector<double>&)>& phi) {
  check_spectral_dim(ops.covariance.rows(), limits);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(ops.covariance);
  if (eig.info() != Eigen::Success) throw NumericalError("spectral fit: eigensolver failed");
  std::vector<double> t(static_cast<std::size_t>(eig.eigenvalues().size()));
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = std::max(0.0, eig.eigenvalues()(j));
  const std::vector<double> values = phi(t);
  const Matrix& U = eig.eigenvectors();
  Vector coeff = U.transpose() * ops.projection;
  for (Eigen::Index j = 0; j < coeff.size(); ++j) coeff(j) *= values[static_cast<std::size_t>(j)];
  return U * coeff;
}

}  // namespace

std::string to_string(FitPath path) { return path == FitPath::Spectral ? "spectral" : "iterative"; }

FitPath fit_path_from_string(const std::string& name) {
  if (name == "spectral") return FitPath::Spectral;
  if (name == "iterative") return FitPath::Iterative;
  throw InvalidArgument("unknown fit path '" + name + "'");
}

std::uint64_t hash_dataset(const Matrix& X, const Vector& y) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const double* data, Eigen::Index count) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    const auto len = static_cast<std::size_t>(count) * sizeof(double);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  mix(X.data(), X.size());
  mix(y.data(), y.size());
  return h;
}

EmpiricalOperators empirical_operators_from_features(const Matrix& Z, const Vector& y) {
  if (Z.rows() < 1) throw InvalidArgument("empirical operators: need n >= 1");
  if (y.size() != Z.rows()) throw DimensionMismatch("empirical operators: |y| differs from n");
  const auto n = static_cast<double>(Z.rows());
  EmpiricalOperators ops;
  ops.n = static_cast<std::size_t>(Z.rows());
  ops.covariance = Matrix::Zero(Z.cols(), Z.cols());
  ops.covariance.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose(), 1.0 / n);
  ops.covariance.triangularView<Eigen::StrictlyUpper>() =
      ops.covariance.triangularView<Eigen::StrictlyLower>().transpose();
  ops.projection = Z.transpose() * y / n;
  ops.mean_sq_target = y.squaredNorm() / n;
  return ops;
}

EmpiricalOperators assemble_empirical_operators(const FeatureMap& map, const Matrix& X,
                                                const Vector& y, const Limits& limits) {
  if (X.rows() < 1) throw InvalidArgument("assemble_empirical_operators: need n >= 1");
  const auto k = static_cast<std::size_t>(map.embedding_dim());
  if (k > limits.max_feature_entries / k)
    throw BudgetExceeded("assemble_empirical_operators: covariance of dimension " +
                         std::to_string(k) + " exceeds the entry budget");
  return empirical_operators_from_features(map.feature_matrix(X, limits), y);
}

RfModel::RfModel(FeatureMap map, Vector theta, SpectralFilter filter, double lambda,
                 std::optional<int> iterations, FitPath path, TrainFingerprint fingerprint)
    : map_(std::move(map)),
      theta_(std::move(theta)),
      filter_(std::move(filter)),
      lambda_(lambda),
      iterations_(iterations),
      path_(path),
      fingerprint_(fingerprint) {
  if (theta_.size() != map_.embedding_dim())
    throw DimensionMismatch("RfModel: theta length differs from the embedding dimension");
}

Vector RfModel::predict(const Matrix& X_test, const Limits& limits) const {
  if (X_test.rows() == 0) return Vector(0);
  return map_.feature_matrix(X_test, limits) * theta_;
}

Vector spectral_solution(const EmpiricalOperators& ops, const SpectralFilter& filter,
                         double lambda, const Limits& limits) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw InvalidArgument("spectral fit: lambda must lie in (0, 1]");
  if (filter.is_iterative())
    return spectral_solution_iterations(ops, filter, filter.iterations_for_lambda(lambda), limits);
  return apply_filter(ops, limits, [&](const std::vector<double>& t) {
    std::vector<double> out(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) out[j] = filter.evaluate(t[j], lambda);
    return out;
  });
}

Vector spectral_solution_iterations(const EmpiricalOperators& ops, const SpectralFilter& filter,
                                    int iterations, const Limits& limits) {
  if (!filter.is_iterative())
    throw InvalidArgument("spectral_solution_iterations: filter is not iterative");
  return apply_filter(ops, limits, [&](const std::vector<double>& t) {
    return filter.evaluate_iterations(t, iterations);
  });
}

double power_iteration_norm(const Matrix& S, int max_iterations, double tol) {
  if (S.rows() == 0) return 0.0;
  Vector v(S.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 1.0 + 1e-3 * static_cast<double>(i % 7);
  v.normalize();
  double estimate = 0.0;
  for (int k = 0; k < max_iterations; ++k) {
    Vector w = S.selfadjointView<Eigen::Lower>() * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const bool converged = std::abs(norm - estimate) <= tol * norm;
    estimate = norm;
    if (converged) break;
  }
  return estimate;
}

IterativeTrajectory iterate(const EmpiricalOperators& ops, const SpectralFilter& filter,
                            int iterations, const IterativeOptions& options) {
  if (!filter.is_iterative())
    throw InvalidArgument("fit_iterative: filter must be landweber or heavyball");
  if (iterations < 1) throw InvalidArgument("fit_iterative: T must be >= 1");
  const double alpha = filter.step_size();
  const double beta = filter.momentum();

  // Stability: alpha t < 2 (1 + beta) on the spectrum.
  const double top = power_iteration_norm(ops.covariance, 60, 1e-8);
  if (alpha * top >= 2.0 * (1.0 + beta))
    throw NumericalError("fit_iterative: step size " + std::to_string(alpha) +
                         " is unstable for ||Sigma|| ~ " + std::to_string(top));

  std::vector<int> snaps = options.snapshots;
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  for (int s : snaps)
    if (s < 1 || s > iterations)
      throw InvalidArgument("fit_iterative: snapshot iteration outside [1, T]");

  const auto dim = ops.covariance.rows();
  IterativeTrajectory out;
  Vector theta = Vector::Zero(dim);
  Vector previous = Vector::Zero(dim);
  Vector grad(dim);
  const double initial_loss = ops.mean_sq_target;
  const double ceiling = options.divergence_factor * std::max(initial_loss, 1e-300);
  auto loss_of = [&](const Vector& th, const Vector& sigma_th) {
    return th.dot(sigma_th) - 2.0 * th.dot(ops.projection) + ops.mean_sq_target;
  };
  if (options.record_losses) out.training_losses.push_back(initial_loss);

  std::size_t next_snap = 0;
  Vector sigma_theta = Vector::Zero(dim);
  for (int k = 0; k < iterations; ++k) {
    grad = sigma_theta - ops.projection;
    Vector next = theta - alpha * grad + beta * (theta - previous);
    previous = std::move(theta);
    theta = std::move(next);
    sigma_theta.noalias() = ops.covariance.selfadjointView<Eigen::Lower>() * theta;
    const double loss = loss_of(theta, sigma_theta);
    if (!std::isfinite(loss) || loss > ceiling)
      throw NumericalError("fit_iterative: training loss diverged at iteration " +
                           std::to_string(k + 1));
    if (options.record_losses) out.training_losses.push_back(loss);
    while (next_snap < snaps.size() && snaps[next_snap] == k + 1) {
      out.snapshots.emplace_back(k + 1, theta);
      ++next_snap;
    }
  }
  out.theta = std::move(theta);
  return out;
}

RfModel fit_spectral(const FeatureMap& map, const Matrix& X, const Vector& y,
                     const SpectralFilter& filter, double lambda, const Limits& limits) {
  check_spectral_dim(map.embedding_dim(), limits);
  const auto ops = assemble_empirical_operators(map, X, y, limits);
  Vector theta = spectral_solution(ops, filter, lambda, limits);
  std::optional<int> T;
  if (filter.is_iterative()) T = filter.iterations_for_lambda(lambda);
  return RfModel(map, std::move(theta), filter, lambda, T, FitPath::Spectral,
                 {static_cast<std::size_t>(X.rows()), map.seed(), hash_dataset(X, y)});
}

IterativeFit fit_iterative(const FeatureMap& map, const Matrix& X, const Vector& y,
                           const SpectralFilter& filter, int iterations,
                           const IterativeOptions& options, const Limits& limits) {
  const auto ops = assemble_empirical_operators(map, X, y, limits);
  auto trajectory = iterate(ops, filter, iterations, options);
  RfModel model(map, std::move(trajectory.theta), filter, filter.lambda_for_iterations(iterations),
                iterations, FitPath::Iterative,
                {static_cast<std::size_t>(X.rows()), map.seed(), hash_dataset(X, y)});
  return {std::move(model), std::move(trajectory.training_losses),
          std::move(trajectory.snapshots)};
}

Vector predict(const RfModel& model, const Matrix& X_test, const Limits& limits) {
  return model.predict(X_test, limits);
}

double mse(const Vector& predictions, const Vector& targets) {
  if (targets.size() == 0) throw InvalidArgument("mse: empty test set");
  if (predictions.size() != targets.size()) throw DimensionMismatch("mse: size mismatch");
  return (predictions - targets).squaredNorm() / static_cast<double>(targets.size());
}

double mse(const RfModel& model, const Matrix& X_test, const Vector& y_test, const Limits& limits) {
  if (X_test.rows() == 0) throw InvalidArgument("mse: empty test set");
  if (y_test.size() != X_test.rows()) throw DimensionMismatch("mse: |y_test| differs from n_test");
  return mse(model.predict(X_test, limits), y_test);
}

}  // namespace rfsr
