#pragma once

#include <variant>
#include <vector>

#include "rfsr/feature_map.hpp"
#include "rfsr/types.hpp"

namespace rfsr {

/// Exact reference kernels used as ground truth for the random-feature path.
class ExactKernel {
 public:
  struct Gaussian {
    double bandwidth;
  };
  struct Designer {
    std::vector<double> eigenvalues;
  };
  struct MonteCarlo {
    FeatureMap map;
  };

  /// exp(-||x - y||^2 / (2 sigma^2)).
  static ExactKernel gaussian(double bandwidth);
  /// sum_j mu_j e_j(x) e_j(y) on [0,1].
  static ExactKernel designer(std::vector<double> eigenvalues);
  /// The inner-product kernel of a (typically large-M) feature map.
  static ExactKernel monte_carlo(FeatureMap map);

  double eval(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const;

  /// Pairwise kernel values. Throws BudgetExceeded above limits.max_gram_n.
  Matrix gram(const Matrix& X, const Limits& limits = {}) const;
  /// k(X_i, Y_j) for every pair.
  Matrix cross(const Matrix& X, const Matrix& Y, const Limits& limits = {}) const;

  const std::variant<Gaussian, Designer, MonteCarlo>& kind() const { return kind_; }

 private:
  explicit ExactKernel(std::variant<Gaussian, Designer, MonteCarlo> kind) : kind_(std::move(kind)) {}
  std::variant<Gaussian, Designer, MonteCarlo> kind_;
};

/// Gram-based kernel ridge regression: alpha = (K + lambda n I)^{-1} y.
class DualRidge {
 public:
  DualRidge(ExactKernel kernel, Matrix X_train, Vector alpha)
      : kernel_(std::move(kernel)), X_(std::move(X_train)), alpha_(std::move(alpha)) {}

  const Vector& alpha() const { return alpha_; }
  /// x -> sum_i alpha_i k(x_i, x).
  Vector predict(const Matrix& X_test, const Limits& limits = {}) const;

 private:
  ExactKernel kernel_;
  Matrix X_;
  Vector alpha_;
};

/// Dense Cholesky solve of (K + lambda n I) alpha = y.
DualRidge krr_gram_fit(const ExactKernel& kernel, const Matrix& X, const Vector& y, double lambda,
                       const Limits& limits = {});

}  // namespace rfsr
