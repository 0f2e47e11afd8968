#pragma once

// Reference implementations used only by the tests. Each is written from the
// defining formula, without calling into the library under test.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline double gaussian_kernel(const Vector& x, const Vector& y, double sigma) {
  return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

// NTK with identity activation and omega ~ N(0, I):
// E[tau^2 x.y + (w.x)(w.y) + tau^2 gamma^2] = (tau^2 + 1) x.y + tau^2 gamma^2.
inline double ntk_identity_kernel(const Vector& x, const Vector& y, double tau, double gamma) {
  return (tau * tau + 1.0) * x.dot(y) + tau * tau * gamma * gamma;
}

inline double cosine_basis(int j, double x) {
  return j == 1 ? 1.0 : std::numbers::sqrt2 * std::cos((j - 1) * std::numbers::pi * x);
}

inline double designer_kernel(const std::vector<double>& mu, double x, double y) {
  double k = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const int idx = static_cast<int>(j) + 1;
    k += mu[j] * cosine_basis(idx, x) * cosine_basis(idx, y);
  }
  return k;
}

// alpha sum_{k<T} (1 - alpha t)^k, summed term by term.
inline double landweber_sum(double t, double alpha, int T) {
  double acc = 0.0;
  double term = 1.0;
  for (int k = 0; k < T; ++k) {
    acc += term;
    term *= 1.0 - alpha * t;
  }
  return alpha * acc;
}

// theta_{k+1} = theta_k - alpha (S theta_k - s) + beta (theta_k - theta_{k-1}),
// run with full matrix products.
inline Vector heavyball_vector(const Matrix& S, const Vector& s, double alpha, double beta, int T) {
  Vector prev = Vector::Zero(s.size());
  Vector cur = Vector::Zero(s.size());
  for (int k = 0; k < T; ++k) {
    Vector next = cur - alpha * (S * cur - s) + beta * (cur - prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

// Scalar filter obtained from the rank-one vector iteration with S = t.
inline double heavyball_scalar(double t, double alpha, double beta, int T) {
  Matrix S(1, 1);
  S(0, 0) = t;
  return heavyball_vector(S, Vector::Ones(1), alpha, beta, T)(0);
}

// (S + lambda I)^{-1} s by LU with full pivoting.
inline Vector ridge_solve(const Matrix& S, const Vector& s, double lambda) {
  const Matrix A = S + lambda * Matrix::Identity(S.rows(), S.cols());
  return A.fullPivLu().solve(s);
}

// Dual ridge: alpha = (K + lambda n I)^{-1} y.
inline Vector dual_ridge(const Matrix& K, const Vector& y, double lambda) {
  const auto n = static_cast<double>(K.rows());
  return (K + lambda * n * Matrix::Identity(K.rows(), K.cols())).fullPivLu().solve(y);
}

inline double effective_dimension(const std::vector<double>& mu, double lambda) {
  long double acc = 0.0L;
  for (double m : mu) acc += static_cast<long double>(m) / (static_cast<long double>(m) + lambda);
  return static_cast<double>(acc);
}

inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  Matrix A(static_cast<Eigen::Index>(x.size()), 2);
  Vector b(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    A(static_cast<Eigen::Index>(i), 0) = 1.0;
    A(static_cast<Eigen::Index>(i), 1) = x[i];
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  return A.colPivHouseholderQr().solve(b)(1);
}

inline std::vector<double> logspace(double lo, double hi, int points) {
  std::vector<double> out;
  for (int i = 0; i < points; ++i)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
  return out;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace oracle
