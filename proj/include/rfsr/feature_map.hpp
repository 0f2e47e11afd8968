#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rfsr/types.hpp"

namespace rfsr {

enum class FeatureKind {
  GaussianRFF,
  NtkOneLayer,
  // Exact features sqrt(mu_j) e_j(x) of a finite-rank kernel on [0,1].
  DesignerFiniteRank,
  // Random features for the same finite-rank kernel: indices j ~ mu_j / S.
  DesignerSampled,
};

enum class Activation { Relu, Tanh, Identity };

struct GaussianRffParams {
  double bandwidth = 1.0;
};

struct NtkParams {
  Activation activation = Activation::Relu;
  double tau = 1.0;
  double gamma = 1.0;
  /// Inputs are validated to satisfy ||x|| <= input_radius.
  double input_radius = 10.0;
};

struct DesignerParams {
  /// mu_1 >= mu_2 >= ... > 0, one per basis function.
  std::vector<double> eigenvalues;
  /// Decay exponent b (mu_j = j^{-1/b} for the default spectrum).
  double decay_exponent = 1.0;
};

using FeatureParams = std::variant<GaussianRffParams, NtkParams, DesignerParams>;

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);
std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

/// Default designer spectrum mu_j = j^{-1/b}, j = 1..rank.
std::vector<double> power_law_spectrum(int rank, double b);

/// Orthonormal cosine basis of L2([0,1]): e_1 = 1, e_j = sqrt(2) cos((j-1) pi x).
/// `j` is 1-based.
double designer_basis(int j, double x);

/// A sampled feature map Phi_M : R^d -> R^{p M}. Immutable once built; the
/// sampled frequencies are a pure function of (kind, dims, params, seed).
class FeatureMap {
 public:
  static FeatureMap sample(FeatureKind kind, int input_dim, int num_samples,
                           FeatureParams params, std::uint64_t seed);

  /// Rebuild from a JSON descriptor. Frequencies are regenerated from the seed.
  static FeatureMap from_descriptor(const nlohmann::json& descriptor);
  nlohmann::json descriptor() const;

  FeatureKind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int num_samples() const { return num_samples_; }
  int component_count() const { return component_count_; }
  int embedding_dim() const { return component_count_ * num_samples_; }
  std::uint64_t seed() const { return seed_; }
  const FeatureParams& params() const { return params_; }

  /// Upper bound on ||embed(x)||^2 over the declared input domain.
  double kappa_sq() const { return kappa_sq_; }
  /// False when kappa_sq rests on an empirical frequency bound (relu/identity NTK).
  bool kappa_sq_certified() const { return kappa_certified_; }

  /// num_samples x input_dim. For designer kinds, column 0 holds the 1-based
  /// basis index used by each feature.
  const Matrix& frequencies() const { return frequencies_; }
  /// Phase offsets (GaussianRFF only; empty otherwise).
  const Vector& phases() const { return phases_; }

  /// Sum of the designer spectrum (the sampling normaliser S); 0 for others.
  double designer_mass() const { return designer_mass_; }

  Vector embed(const Eigen::Ref<const Vector>& x) const;
  void embed_into(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) const;

  /// K_M(x, y) = embed(x) . embed(y).
  double approx_kernel(const Eigen::Ref<const Vector>& x,
                       const Eigen::Ref<const Vector>& y) const;

  /// Row i is embed(X.row(i)).
  Matrix feature_matrix(const Matrix& X, const Limits& limits = {}) const;

 private:
  FeatureMap() = default;
  void check_input(const Eigen::Ref<const Vector>& x) const;

  FeatureKind kind_ = FeatureKind::GaussianRFF;
  int input_dim_ = 0;
  int num_samples_ = 0;
  int component_count_ = 1;
  FeatureParams params_;
  std::uint64_t seed_ = 0;
  double kappa_sq_ = 0.0;
  bool kappa_certified_ = true;
  double designer_mass_ = 0.0;
  Matrix frequencies_;
  Vector phases_;
  // Per-feature multiplier for designer kinds (sqrt(mu_j) or sqrt(S / M)).
  Vector designer_scale_;
};

}  // namespace rfsr
