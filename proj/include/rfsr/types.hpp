#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

namespace rfsr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Size caps shared by every dense assembly in the library. Exceeding one is
/// an explicit BudgetExceeded error, never a silent truncation.
struct Limits {
  /// Maximum number of doubles in one feature matrix (n * p * M).
  std::size_t max_feature_entries = 60'000'000;
  /// Largest n for which a dense n x n gram is built.
  std::size_t max_gram_n = 5000;
  /// Largest embedding dimension p * M for an eigendecomposition.
  std::size_t max_spectral_dim = 4096;
};

}  // namespace rfsr
