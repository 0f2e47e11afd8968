#pragma once

#include <cstddef>

namespace rfsr::harness {

/// log(2/delta) = 1 at this confidence level.
inline constexpr double kNeutralDelta = 0.73575888234288464;  // 2 / e

/// n_0 = ceil(exp((2r+b) / (2r+b-1))). Requires 2r + b > 1.
std::size_t min_sample_size(double r, double b);

/// lambda = min(1, C n^{-1/(2r+b)} log^3(2/delta)).
double lambda_schedule(std::size_t n, double r, double b, double delta, double C_lambda);

/// Exponent of n in the feature-count rule, by source regime.
double m_exponent(double r, double b);

/// M = ceil(C_M log(n) n^e).
int m_schedule(std::size_t n, double r, double b, double C_M);

/// Theoretical excess-risk exponent -r / (2r + b).
double rate_exponent(double r, double b);

}  // namespace rfsr::harness
