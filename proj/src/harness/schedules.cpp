#include "rfsr/harness/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rfsr/errors.hpp"

namespace rfsr::harness {

namespace {

void check_regime(double r, double b) {
  if (!(r > 0.0)) throw InvalidArgument("schedule: r must be positive");
  if (!(b > 0.0 && b <= 1.0)) throw InvalidArgument("schedule: b must lie in (0, 1]");
  if (!(2.0 * r + b > 1.0))
    throw InvalidArgument("schedule: hard-learning regime 2r + b <= 1 is not supported");
}

void check_n(std::size_t n, double r, double b) {
  check_regime(r, b);
  const std::size_t n0 = min_sample_size(r, b);
  if (n < n0)
    throw InvalidArgument("schedule: n = " + std::to_string(n) + " is below n0 = " +
                          std::to_string(n0));
}

}  // namespace

std::size_t min_sample_size(double r, double b) {
  check_regime(r, b);
  const double s = 2.0 * r + b;
  const double v = std::ceil(std::exp(s / (s - 1.0)));
  if (!(v < 1e18)) throw InvalidArgument("schedule: n0 overflows (2r + b too close to 1)");
  return static_cast<std::size_t>(v);
}

double lambda_schedule(std::size_t n, double r, double b, double delta, double C_lambda) {
  check_n(n, r, b);
  if (!(delta > 0.0 && delta < 2.0)) throw InvalidArgument("lambda_schedule: delta must lie in (0, 2)");
  if (!(C_lambda > 0.0)) throw InvalidArgument("lambda_schedule: C_lambda must be positive");
  const double l = std::log(2.0 / delta);
  const double value =
      C_lambda * std::pow(static_cast<double>(n), -1.0 / (2.0 * r + b)) * l * l * l;
  return std::min(1.0, value);
}

double m_exponent(double r, double b) {
  check_regime(r, b);
  const double s = 2.0 * r + b;
  if (r < 0.5) return 1.0 / s;
  if (r <= 1.0) return (1.0 + b * (2.0 * r - 1.0)) / s;
  return 2.0 * r / s;
}

int m_schedule(std::size_t n, double r, double b, double C_M) {
  check_n(n, r, b);
  if (!(C_M > 0.0)) throw InvalidArgument("m_schedule: C_M must be positive");
  const double nd = static_cast<double>(n);
  const double M = std::ceil(C_M * std::log(nd) * std::pow(nd, m_exponent(r, b)));
  if (!(M < static_cast<double>(std::numeric_limits<int>::max())))
    throw BudgetExceeded("m_schedule: feature count overflows");
  return std::max(1, static_cast<int>(M));
}

double rate_exponent(double r, double b) {
  check_regime(r, b);
  return -r / (2.0 * r + b);
}

}  // namespace rfsr::harness
