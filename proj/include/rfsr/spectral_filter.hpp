#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rfsr {

enum class FilterKind { Tikhonov, Landweber, Heavyball, SpectralCutoff };

std::string to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& name);

/// Bounds from the regularization-function axioms:
///   sup_t |t phi(t)| <= D,  lambda sup_t |phi(t)| <= E,  sup_t |1 - t phi(t)| <= c0.
struct FilterConstants {
  double D = 0.0;
  double E = 0.0;
  double c0 = 0.0;
};

/// A spectral filter phi_lambda. Immutable value type.
///
/// Iterative kinds (Landweber, Heavyball) are polynomials in t indexed by an
/// iteration count T; the regularization parameter is tied to T through
/// lambda = 1 / (alpha_eff * T), alpha_eff = alpha / (1 - beta).
class SpectralFilter {
 public:
  static SpectralFilter tikhonov();
  static SpectralFilter spectral_cutoff();
  static SpectralFilter landweber(double step_size);
  static SpectralFilter heavyball(double step_size, double momentum);

  /// Heavyball with alpha = 1/(4 kappa^2) and beta = 0.9 capped so alpha_eff <= 1.
  static SpectralFilter default_heavyball(double kappa_sq);
  /// Landweber with alpha = 1/kappa^2.
  static SpectralFilter default_landweber(double kappa_sq);

  static SpectralFilter from_descriptor(const nlohmann::json& descriptor);
  nlohmann::json descriptor() const;

  FilterKind kind() const { return kind_; }
  std::string name() const { return to_string(kind_); }
  bool is_iterative() const {
    return kind_ == FilterKind::Landweber || kind_ == FilterKind::Heavyball;
  }
  double step_size() const { return step_; }
  double momentum() const { return momentum_; }
  double effective_step() const { return step_ / (1.0 - momentum_); }

  /// Analytic D, E, c0 for this filter.
  const FilterConstants& constants() const { return constants_; }
  /// Declared qualification nu (infinity for cutoff and Landweber). Empty when
  /// the qualification is only measured (Heavyball).
  std::optional<double> declared_qualification() const { return qualification_; }

  /// phi_lambda(t) for t, lambda in (0, 1]. Throws InvalidArgument out of range.
  double value(double t, double lambda) const;
  /// 1 - t phi_lambda(t), computed from value().
  double residual(double t, double lambda) const;

  /// phi_lambda(t) for any t >= 0 (continuous extension at t = 0). Used on
  /// empirical spectra, which may exceed 1.
  double evaluate(double t, double lambda) const;
  /// Iterative kinds: the degree-(T-1) filter polynomial at t >= 0.
  double evaluate_iterations(double t, int iterations) const;
  /// Values of the filter polynomial for every t in `ts` (same result as
  /// evaluate_iterations, evaluated in one pass of the recurrence).
  std::vector<double> evaluate_iterations(const std::vector<double>& ts, int iterations) const;

  double lambda_for_iterations(int iterations) const;
  int iterations_for_lambda(double lambda) const;

 private:
  SpectralFilter(FilterKind kind, double step, double momentum);

  FilterKind kind_;
  double step_ = 0.0;
  double momentum_ = 0.0;
  FilterConstants constants_;
  std::optional<double> qualification_;
};

double lambda_for_iterations(const SpectralFilter& f, int iterations);
int iterations_for_lambda(const SpectralFilter& f, double lambda);

/// Audit grid: log-spaced t in [t_min, 1] and lambda in [lambda_min, 1].
struct AuditGrid {
  int t_points = 2000;
  int lambda_points = 50;
  double t_min = 1e-6;
  double lambda_min = 1e-4;
  std::vector<double> orders = {0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  /// Slack added to each declared constant when judging pass/fail.
  double slack = 1e-9;
  /// A qualification order is deemed bounded when c_q(lambda) does not grow
  /// faster than lambda^{bounded_slope} over the smallest lambda decade.
  double bounded_slope = -0.1;
};

struct QualificationEntry {
  double order = 0.0;
  /// max over the lambda grid of sup_t |r(t)| t^q / lambda^q.
  double measured = 0.0;
  /// log-log slope of c_q(lambda) over the smallest lambda decade.
  double small_lambda_slope = 0.0;
  bool bounded = false;
};

struct AuditReport {
  std::string filter;
  FilterConstants declared;
  FilterConstants measured;
  std::optional<double> declared_qualification;
  /// Largest tabulated q such that every order <= q is bounded (0 if none).
  double measured_qualification = 0.0;
  std::vector<QualificationEntry> qualification;
  std::size_t grid_points = 0;
  bool constants_pass = false;
  /// Constants hold and every tabulated q <= declared nu is bounded.
  bool pass = false;

  const QualificationEntry* entry(double order) const;
  nlohmann::json to_json() const;
};

AuditReport audit_filter(const SpectralFilter& f, const AuditGrid& grid = {});

/// True iff nu >= 0.5 + max(r, 1), using the declared qualification.
bool qualification_sufficient(const SpectralFilter& f, double r);
/// Same predicate using a measured qualification.
bool qualification_sufficient(const AuditReport& report, double r);

}  // namespace rfsr
