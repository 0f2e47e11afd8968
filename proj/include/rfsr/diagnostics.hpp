#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfsr/estimator.hpp"
#include "rfsr/feature_map.hpp"
#include "rfsr/kernel_oracles.hpp"
#include "rfsr/spectral_filter.hpp"

namespace rfsr {

/// Gaussian noise and the Bernstein-moment constants certifying it.
struct NoiseModel {
  double std = 0.0;
  double Q = 0.0;
  double Z = 0.0;
};

/// A finite-rank kernel on [0,1] with known eigenpairs (mu_j, e_j) and a
/// target g = L^r h, so every L2 quantity is a finite coefficient sum.
struct DesignerProblem {
  std::vector<double> eigenvalues;
  /// Effective-dimension exponent and the constant c_b = sup_l N(l) l^b.
  double b = 1.0;
  double c_b = 0.0;
  double r = 0.5;
  double R = 1.0;
  Vector h;
  Vector g;
  NoiseModel noise;

  int rank() const { return static_cast<int>(eigenvalues.size()); }
  /// Exact features sqrt(mu_j) e_j (M = J, no Monte Carlo error).
  FeatureMap exact_map() const;
  /// Random features for the same kernel with M sampled indices.
  FeatureMap sampled_map(int num_samples, std::uint64_t seed) const;
  ExactKernel kernel() const { return ExactKernel::designer(eigenvalues); }
  /// g(x) = sum_j g_j e_j(x).
  double target(double x) const;
  /// ||g||_{L2} = sqrt(sum g_j^2).
  double target_norm() const { return g.norm(); }
};

struct DesignerOptions {
  /// Source direction z_j = j^{-source_decay}; h = R z / ||z||.
  double source_decay = 1.0;
  /// Multiply z_j by random signs drawn from `seed`.
  bool random_signs = false;
  /// Override the default spectrum j^{-1/b}.
  std::vector<double> eigenvalues;
};

/// Requires J >= 2, b in (0, 1], r > 0 and 2r + b > 1.
DesignerProblem make_designer_problem(int J, double b, double r, double R, double noise_std,
                                      std::uint64_t seed, const DesignerOptions& options = {});

struct Dataset {
  Matrix X;
  Vector y;
};

/// x ~ U[0,1], y = g(x) + N(0, sigma^2). Deterministic in the seed.
Dataset sample_dataset(const DesignerProblem& problem, std::size_t n, std::uint64_t seed);

/// N(lambda) = sum_j mu_j / (mu_j + lambda).
double effective_dimension(std::span<const double> eigenvalues, double lambda);

/// Eigenvalues of L_M in the e_j basis for a designer map. For exact maps this
/// is mu; for sampled maps it is S * count_j / M.
Vector operator_spectrum(const DesignerProblem& problem, const FeatureMap& map);

/// e_j-coefficients of the fitted function S f for a designer model.
Vector fitted_coefficients(const DesignerProblem& problem, const RfModel& model);

struct FStar {
  /// e_j-coefficients of S_M f*_lambda: t_j phi_lambda(t_j) g_j.
  Vector coefficients;
  /// ||g - S_M f*_lambda||_{L2}.
  double bias = 0.0;
};

FStar compute_f_star(const DesignerProblem& problem, const FeatureMap& map,
                     const SpectralFilter& filter, double lambda);
FStar compute_f_star(const DesignerProblem& problem, const SpectralFilter& filter, double lambda);

struct ExcessRisk {
  double total = 0.0;
  double bias = 0.0;
  double variance = 0.0;
};

/// total = ||g - S f||, bias = ||g - S f*||, variance = ||S f* - S f||, all
/// computed as exact coefficient sums.
ExcessRisk excess_risk_exact(const DesignerProblem& problem, const RfModel& model);

/// 3 R c_{max(r,1)} lambda^r.
double bias_bound(const DesignerProblem& problem, double c_q, double lambda);

struct SupNormReport {
  double value = 0.0;
  double bound = 0.0;
  bool within = false;
};

/// sup over a uniform grid of [0,1] of |S f*_lambda|, against
/// 2 kappa^{2r+1} R D lambda^{-(1/2 - r)^+}.
SupNormReport sup_norm_f_star(const DesignerProblem& problem, const FeatureMap& map,
                              const SpectralFilter& filter, double lambda, int grid_points = 10000);

enum class ComparisonStatus { Ok, Flagged, Indeterminate };
std::string to_string(ComparisonStatus status);

struct EffectiveDimensionComparison {
  double random_dimension = 0.0;
  double reference_dimension = 0.0;
  double ratio = 0.0;
  double threshold = 0.0;
  ComparisonStatus status = ComparisonStatus::Ok;
};

/// N_{L_M}(lambda) / N_{L_inf}(lambda) from gram eigenvalues / n_probe;
/// flagged above 4 (1 + 2 log(2/delta)), indeterminate when either N < 1e-6.
EffectiveDimensionComparison effective_dimension_comparison(const FeatureMap& map_random,
                                                            const ExactKernel& map_ref,
                                                            const Matrix& X_probe, double lambda,
                                                            double delta = 0.1,
                                                            const Limits& limits = {});

/// {quantity, lambda, value, bound, status} with status "pass", "fail" or "monitored".
struct DiagnosticRecord {
  std::string quantity;
  double lambda = 0.0;
  double value = 0.0;
  double bound = 0.0;
  std::string status;
  nlohmann::json to_json() const;
};

}  // namespace rfsr
