#include "rfsr/kernel_oracles.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "rfsr/errors.hpp"

namespace rfsr {

ExactKernel ExactKernel::gaussian(double bandwidth) {
  if (!(bandwidth > 0.0)) throw InvalidArgument("gaussian kernel: bandwidth must be positive");
  return ExactKernel(Gaussian{bandwidth});
}

ExactKernel ExactKernel::designer(std::vector<double> eigenvalues) {
  if (eigenvalues.empty()) throw InvalidArgument("designer kernel: empty spectrum");
  for (double mu : eigenvalues)
    if (!(mu >= 0.0)) throw InvalidArgument("designer kernel: eigenvalues must be >= 0");
  return ExactKernel(Designer{std::move(eigenvalues)});
}

ExactKernel ExactKernel::monte_carlo(FeatureMap map) { return ExactKernel(MonteCarlo{std::move(map)}); }

double ExactKernel::eval(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const {
  if (x.size() != y.size()) throw DimensionMismatch("eval_kernel: x and y differ in dimension");
  if (const auto* g = std::get_if<Gaussian>(&kind_)) {
    const double sq = (x - y).squaredNorm();
    return std::exp(-sq / (2.0 * g->bandwidth * g->bandwidth));
  }
  if (const auto* d = std::get_if<Designer>(&kind_)) {
    if (x.size() != 1) throw DimensionMismatch("designer kernel: inputs must be scalars");
    double acc = 0.0;
    for (std::size_t j = 0; j < d->eigenvalues.size(); ++j) {
      const int idx = static_cast<int>(j) + 1;
      acc += d->eigenvalues[j] * designer_basis(idx, x(0)) * designer_basis(idx, y(0));
    }
    return acc;
  }
  const auto& mc = std::get<MonteCarlo>(kind_);
  return mc.map.approx_kernel(x, y);
}

Matrix ExactKernel::cross(const Matrix& X, const Matrix& Y, const Limits& limits) const {
  if (X.rows() > 0 && Y.rows() > 0 && X.cols() != Y.cols())
    throw DimensionMismatch("kernel cross matrix: point sets differ in dimension");
  const auto big = static_cast<std::size_t>(std::max(X.rows(), Y.rows()));
  if (big > limits.max_gram_n)
    throw BudgetExceeded("gram: n = " + std::to_string(big) + " exceeds the cap of " +
                         std::to_string(limits.max_gram_n));
  if (const auto* mc = std::get_if<MonteCarlo>(&kind_)) {
    const Matrix ZX = mc->map.feature_matrix(X, limits);
    const Matrix ZY = mc->map.feature_matrix(Y, limits);
    return ZX * ZY.transpose();
  }
  Matrix K(X.rows(), Y.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < Y.rows(); ++j)
      K(i, j) = eval(X.row(i).transpose(), Y.row(j).transpose());
  return K;
}

Matrix ExactKernel::gram(const Matrix& X, const Limits& limits) const {
  if (X.rows() < 1) throw InvalidArgument("gram: need at least one point");
  Matrix K = cross(X, X, limits);
  // Exact symmetry regardless of summation order.
  Matrix sym = 0.5 * (K + K.transpose());
  return sym;
}

Vector DualRidge::predict(const Matrix& X_test, const Limits& limits) const {
  if (X_test.rows() == 0) return Vector(0);
  return kernel_.cross(X_test, X_, limits) * alpha_;
}

DualRidge krr_gram_fit(const ExactKernel& kernel, const Matrix& X, const Vector& y, double lambda,
                       const Limits& limits) {
  if (!(lambda > 0.0)) throw InvalidArgument("krr_gram_fit: lambda must be positive");
  if (y.size() != X.rows()) throw DimensionMismatch("krr_gram_fit: |y| differs from n");
  const auto n = static_cast<double>(X.rows());
  Matrix A = kernel.gram(X, limits);
  A.diagonal().array() += lambda * n;
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success)
    throw NumericalError("krr_gram_fit: Cholesky factorization of K + lambda n I failed");
  Vector alpha = llt.solve(y);
  return DualRidge(kernel, X, std::move(alpha));
}

}  // namespace rfsr
