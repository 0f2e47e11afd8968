#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfsr/feature_map.hpp"
#include "rfsr/spectral_filter.hpp"
#include "rfsr/types.hpp"

namespace rfsr {

/// Empirical covariance Sigma_M = Z^T Z / n and projection S*_M y = Z^T y / n.
struct EmpiricalOperators {
  Matrix covariance;
  Vector projection;
  std::size_t n = 0;
  /// ||y||^2 / n, so that training loss is available without Z.
  double mean_sq_target = 0.0;
};

EmpiricalOperators assemble_empirical_operators(const FeatureMap& map, const Matrix& X,
                                                const Vector& y, const Limits& limits = {});
/// Same, from a precomputed feature matrix.
EmpiricalOperators empirical_operators_from_features(const Matrix& Z, const Vector& y);

enum class FitPath { Spectral, Iterative };
std::string to_string(FitPath path);
FitPath fit_path_from_string(const std::string& name);

struct TrainFingerprint {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t data_hash = 0;
};

/// FNV-1a over the raw bytes of X and y.
std::uint64_t hash_dataset(const Matrix& X, const Vector& y);

/// Fitted parameter vector plus the feature map interpreting it:
/// predict(x) = embed(map, x) . theta.
class RfModel {
 public:
  RfModel(FeatureMap map, Vector theta, SpectralFilter filter, double lambda,
          std::optional<int> iterations, FitPath path, TrainFingerprint fingerprint);

  const FeatureMap& map() const { return map_; }
  const Vector& theta() const { return theta_; }
  const SpectralFilter& filter() const { return filter_; }
  double lambda() const { return lambda_; }
  std::optional<int> iterations() const { return iterations_; }
  FitPath fit_path() const { return path_; }
  const TrainFingerprint& fingerprint() const { return fingerprint_; }

  Vector predict(const Matrix& X_test, const Limits& limits = {}) const;

 private:
  FeatureMap map_;
  Vector theta_;
  SpectralFilter filter_;
  double lambda_;
  std::optional<int> iterations_;
  FitPath path_;
  TrainFingerprint fingerprint_;
};

/// theta = U diag(phi_lambda(t_j)) U^T s for Sigma = U diag(t_j) U^T, with
/// eigenvalues clamped at zero.
Vector spectral_solution(const EmpiricalOperators& ops, const SpectralFilter& filter,
                         double lambda, const Limits& limits = {});

/// Same with an iterative filter at a fixed iteration count.
Vector spectral_solution_iterations(const EmpiricalOperators& ops, const SpectralFilter& filter,
                                    int iterations, const Limits& limits = {});

struct IterativeOptions {
  bool record_losses = false;
  /// Iteration counts at which to keep a copy of theta (each in [1, T]).
  std::vector<int> snapshots;
  /// Error out when the training loss exceeds this multiple of the initial loss.
  double divergence_factor = 1e3;
};

struct IterativeTrajectory {
  Vector theta;
  /// training_losses[k] = loss after k steps (index 0 is theta = 0).
  std::vector<double> training_losses;
  std::vector<std::pair<int, Vector>> snapshots;
};

/// theta_{t+1} = theta_t - alpha (Sigma theta_t - s) + beta (theta_t - theta_{t-1}),
/// theta_0 = theta_{-1} = 0. Identical to the per-sample gradient form since
/// (1/n) sum_j (Phi(x_j)^T theta - y_j) Phi(x_j) = Sigma theta - s.
IterativeTrajectory iterate(const EmpiricalOperators& ops, const SpectralFilter& filter,
                            int iterations, const IterativeOptions& options = {});

/// Largest eigenvalue estimate of a symmetric PSD matrix by power iteration.
double power_iteration_norm(const Matrix& S, int max_iterations = 100, double tol = 1e-10);

RfModel fit_spectral(const FeatureMap& map, const Matrix& X, const Vector& y,
                     const SpectralFilter& filter, double lambda, const Limits& limits = {});

struct IterativeFit {
  RfModel model;
  std::vector<double> training_losses;
  std::vector<std::pair<int, Vector>> snapshots;
};

IterativeFit fit_iterative(const FeatureMap& map, const Matrix& X, const Vector& y,
                           const SpectralFilter& filter, int iterations,
                           const IterativeOptions& options = {}, const Limits& limits = {});

Vector predict(const RfModel& model, const Matrix& X_test, const Limits& limits = {});

/// (1 / n_test) sum (predict - y)^2.
double mse(const RfModel& model, const Matrix& X_test, const Vector& y_test,
           const Limits& limits = {});
double mse(const Vector& predictions, const Vector& targets);

}  // namespace rfsr
