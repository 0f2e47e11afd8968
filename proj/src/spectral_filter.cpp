#include "rfsr/spectral_filter.hpp"

#include <algorithm>
#include <cmath>

#include "rfsr/errors.hpp"

namespace rfsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative tolerance when rounding 1/(alpha_eff lambda) up to an integer, so
// that lambda_for_iterations and iterations_for_lambda round-trip exactly.
constexpr double kRoundingTolerance = 1e-10;
constexpr double kMaxIterations = 1e9;

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  if (points == 1) {
    g[0] = hi;
    return g;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < points; ++i) g[i] = std::exp(a + (b - a) * i / (points - 1));
  g.back() = hi;
  return g;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::Tikhonov:
      return "tikhonov";
    case FilterKind::Landweber:
      return "landweber";
    case FilterKind::Heavyball:
      return "heavyball";
    case FilterKind::SpectralCutoff:
      return "spectral_cutoff";
  }
  return "unknown";
}

FilterKind filter_kind_from_string(const std::string& name) {
  if (name == "tikhonov" || name == "ridge") return FilterKind::Tikhonov;
  if (name == "landweber" || name == "gd") return FilterKind::Landweber;
  if (name == "heavyball") return FilterKind::Heavyball;
  if (name == "spectral_cutoff" || name == "cutoff") return FilterKind::SpectralCutoff;
  throw InvalidArgument("unknown filter kind '" + name + "'");
}

SpectralFilter::SpectralFilter(FilterKind kind, double step, double momentum)
    : kind_(kind), step_(step), momentum_(momentum) {
  switch (kind) {
    case FilterKind::Tikhonov:
      constants_ = {1.0, 1.0, 1.0};
      qualification_ = 1.0;
      break;
    case FilterKind::SpectralCutoff:
      constants_ = {1.0, 1.0, 1.0};
      qualification_ = kInf;
      break;
    case FilterKind::Landweber:
      // |1 - alpha t| <= 1 on (0, 1] for alpha < 2; lambda alpha T <= 1 + alpha.
      constants_ = {step <= 1.0 ? 1.0 : 2.0, 1.0 + step, 1.0};
      qualification_ = kInf;
      break;
    case FilterKind::Heavyball:
      constants_ = {2.0, 2.0, 1.0};
      qualification_.reset();
      break;
  }
}

SpectralFilter SpectralFilter::tikhonov() { return {FilterKind::Tikhonov, 0.0, 0.0}; }

SpectralFilter SpectralFilter::spectral_cutoff() { return {FilterKind::SpectralCutoff, 0.0, 0.0}; }

SpectralFilter SpectralFilter::landweber(double step_size) {
  if (!(step_size > 0.0) || !(step_size < 2.0))
    throw InvalidArgument("landweber: step size must lie in (0, 2)");
  return {FilterKind::Landweber, step_size, 0.0};
}

SpectralFilter SpectralFilter::heavyball(double step_size, double momentum) {
  if (!(step_size > 0.0)) throw InvalidArgument("heavyball: step size must be positive");
  if (!(momentum >= 0.0) || !(momentum < 1.0))
    throw InvalidArgument("heavyball: momentum must lie in [0, 1)");
  if (!(step_size < 2.0 * (1.0 + momentum)))
    throw InvalidArgument("heavyball: step size must be below 2 (1 + momentum)");
  return {FilterKind::Heavyball, step_size, momentum};
}

SpectralFilter SpectralFilter::default_landweber(double kappa_sq) {
  if (!(kappa_sq > 0.0)) throw InvalidArgument("default_landweber: kappa^2 must be positive");
  return landweber(std::min(1.0, 1.0 / kappa_sq));
}

SpectralFilter SpectralFilter::default_heavyball(double kappa_sq) {
  if (!(kappa_sq > 0.0)) throw InvalidArgument("default_heavyball: kappa^2 must be positive");
  const double alpha = std::min(0.25, 1.0 / (4.0 * kappa_sq));
  const double beta = std::min(0.9, 1.0 - alpha);
  return heavyball(alpha, beta);
}

nlohmann::json SpectralFilter::descriptor() const {
  nlohmann::json j;
  j["kind"] = name();
  if (kind_ == FilterKind::Landweber || kind_ == FilterKind::Heavyball) j["step_size"] = step_;
  if (kind_ == FilterKind::Heavyball) j["momentum"] = momentum_;
  return j;
}

SpectralFilter SpectralFilter::from_descriptor(const nlohmann::json& descriptor) {
  try {
    switch (filter_kind_from_string(descriptor.at("kind").get<std::string>())) {
      case FilterKind::Tikhonov:
        return tikhonov();
      case FilterKind::SpectralCutoff:
        return spectral_cutoff();
      case FilterKind::Landweber:
        return landweber(descriptor.at("step_size").get<double>());
      case FilterKind::Heavyball:
        return heavyball(descriptor.at("step_size").get<double>(),
                         descriptor.at("momentum").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("filter descriptor: ") + e.what());
  }
  throw InvalidArgument("filter descriptor: unreachable");
}

double SpectralFilter::lambda_for_iterations(int iterations) const {
  if (!is_iterative())
    throw InvalidArgument(name() + ": no iteration count for a non-iterative filter");
  if (iterations < 1) throw InvalidArgument("lambda_for_iterations: T must be >= 1");
  return 1.0 / (effective_step() * static_cast<double>(iterations));
}

int SpectralFilter::iterations_for_lambda(double lambda) const {
  if (!is_iterative())
    throw InvalidArgument(name() + ": no iteration count for a non-iterative filter");
  if (!(lambda > 0.0)) throw InvalidArgument("iterations_for_lambda: lambda must be positive");
  const double exact = 1.0 / (effective_step() * lambda);
  if (exact > kMaxIterations) throw InvalidArgument("iterations_for_lambda: lambda too small");
  const double T = std::ceil(exact * (1.0 - kRoundingTolerance));
  return std::max(1, static_cast<int>(T));
}

double SpectralFilter::evaluate_iterations(double t, int iterations) const {
  if (!is_iterative())
    throw InvalidArgument(name() + ": evaluate_iterations needs an iterative filter");
  if (iterations < 1) throw InvalidArgument("evaluate_iterations: T must be >= 1");
  if (t < 0.0) throw InvalidArgument("evaluate_iterations: t must be >= 0");
  const double T = iterations;

  if (kind_ == FilterKind::Landweber) {
    if (t == 0.0) return step_ * T;
    const double x = step_ * t;
    if (x < 1.0) return -std::expm1(T * std::log1p(-x)) / t;
    return (1.0 - std::pow(1.0 - x, T)) / t;
  }

  // u_{k+1} = u_k + alpha (1 - t u_k) + beta (u_k - u_{k-1}), u_0 = 0, u_1 = alpha.
  double prev = 0.0;
  double cur = step_;
  for (int k = 1; k < iterations; ++k) {
    const double next = cur + step_ * (1.0 - t * cur) + momentum_ * (cur - prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> SpectralFilter::evaluate_iterations(const std::vector<double>& ts,
                                                        int iterations) const {
  if (kind_ != FilterKind::Heavyball) {
    std::vector<double> out(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) out[i] = evaluate_iterations(ts[i], iterations);
    return out;
  }
  if (iterations < 1) throw InvalidArgument("evaluate_iterations: T must be >= 1");
  for (double t : ts)
    if (t < 0.0) throw InvalidArgument("evaluate_iterations: t must be >= 0");
  std::vector<double> prev(ts.size(), 0.0);
  std::vector<double> cur(ts.size(), step_);
  for (int k = 1; k < iterations; ++k) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double next = cur[i] + step_ * (1.0 - ts[i] * cur[i]) + momentum_ * (cur[i] - prev[i]);
      prev[i] = cur[i];
      cur[i] = next;
    }
  }
  return cur;
}

double SpectralFilter::evaluate(double t, double lambda) const {
  if (!(lambda > 0.0)) throw InvalidArgument(name() + ": lambda must be positive");
  if (!(t >= 0.0)) throw InvalidArgument(name() + ": spectral value must be >= 0");
  switch (kind_) {
    case FilterKind::Tikhonov:
      return 1.0 / (t + lambda);
    case FilterKind::SpectralCutoff:
      return t >= lambda ? 1.0 / t : 0.0;
    case FilterKind::Landweber:
    case FilterKind::Heavyball:
      return evaluate_iterations(t, iterations_for_lambda(lambda));
  }
  return 0.0;
}

double SpectralFilter::value(double t, double lambda) const {
  if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument(name() + ": t must lie in (0, 1]");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidArgument(name() + ": lambda must lie in (0, 1]");
  return evaluate(t, lambda);
}

double SpectralFilter::residual(double t, double lambda) const {
  return 1.0 - t * value(t, lambda);
}

double lambda_for_iterations(const SpectralFilter& f, int iterations) {
  return f.lambda_for_iterations(iterations);
}

int iterations_for_lambda(const SpectralFilter& f, double lambda) {
  return f.iterations_for_lambda(lambda);
}

const QualificationEntry* AuditReport::entry(double order) const {
  for (const auto& e : qualification)
    if (std::abs(e.order - order) < 1e-12) return &e;
  return nullptr;
}

nlohmann::json AuditReport::to_json() const {
  auto constants = [](const FilterConstants& c) {
    return nlohmann::json{{"D", c.D}, {"E", c.E}, {"c0", c.c0}};
  };
  nlohmann::json j;
  j["filter"] = filter;
  j["constants_declared"] = constants(declared);
  j["constants_measured"] = constants(measured);
  nlohmann::json table = nlohmann::json::array();
  for (const auto& e : qualification) {
    table.push_back({{"q", e.order},
                     {"c_q", e.measured},
                     {"small_lambda_slope", e.small_lambda_slope},
                     {"bounded", e.bounded}});
  }
  j["constants_measured"]["qualification"] = table;
  if (declared_qualification) {
    j["constants_declared"]["nu"] = std::isinf(*declared_qualification)
                                        ? nlohmann::json("inf")
                                        : nlohmann::json(*declared_qualification);
  } else {
    j["constants_declared"]["nu"] = nullptr;
  }
  j["constants_measured"]["nu"] = measured_qualification;
  j["grid_points"] = grid_points;
  j["constants_pass"] = constants_pass;
  j["pass"] = pass;
  return j;
}

AuditReport audit_filter(const SpectralFilter& f, const AuditGrid& grid) {
  AuditReport report;
  report.filter = f.name();
  report.declared = f.constants();
  report.declared_qualification = f.declared_qualification();

  const auto ts = log_grid(grid.t_min, 1.0, grid.t_points);
  const auto lambdas = log_grid(grid.lambda_min, 1.0, grid.lambda_points);
  report.grid_points = ts.size() * lambdas.size();

  std::vector<double> orders = grid.orders;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  // c_q(lambda) for each order, indexed [order][lambda].
  std::vector<std::vector<double>> cq(orders.size(), std::vector<double>(lambdas.size(), 0.0));

  FilterConstants measured;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const double lambda = lambdas[l];
    std::vector<double> phi;
    if (f.is_iterative()) {
      phi = f.evaluate_iterations(ts, f.iterations_for_lambda(lambda));
    } else {
      phi.resize(ts.size());
      for (std::size_t i = 0; i < ts.size(); ++i) phi[i] = f.value(ts[i], lambda);
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double t = ts[i];
      const double r = 1.0 - t * phi[i];
      measured.D = std::max(measured.D, std::abs(t * phi[i]));
      measured.E = std::max(measured.E, lambda * std::abs(phi[i]));
      measured.c0 = std::max(measured.c0, std::abs(r));
      for (std::size_t k = 0; k < orders.size(); ++k) {
        const double ratio = std::abs(r) * std::pow(t / lambda, orders[k]);
        cq[k][l] = std::max(cq[k][l], ratio);
      }
    }
  }
  report.measured = measured;

  // Smallest lambda decade.
  std::vector<double> log_lambda;
  std::vector<std::size_t> decade;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    if (lambdas[l] <= 10.0 * grid.lambda_min * (1.0 + 1e-12)) {
      decade.push_back(l);
      log_lambda.push_back(std::log(lambdas[l]));
    }
  }

  bool all_bounded_so_far = true;
  report.measured_qualification = 0.0;
  for (std::size_t k = 0; k < orders.size(); ++k) {
    QualificationEntry e;
    e.order = orders[k];
    e.measured = *std::max_element(cq[k].begin(), cq[k].end());
    std::vector<double> log_c;
    for (std::size_t l : decade) log_c.push_back(std::log(std::max(cq[k][l], 1e-300)));
    e.small_lambda_slope = decade.size() >= 2 ? ols_slope(log_lambda, log_c) : 0.0;
    e.bounded = std::isfinite(e.measured) && e.small_lambda_slope > grid.bounded_slope;
    if (e.bounded && all_bounded_so_far) report.measured_qualification = e.order;
    all_bounded_so_far = all_bounded_so_far && e.bounded;
    report.qualification.push_back(e);
  }

  const double s = grid.slack;
  report.constants_pass = measured.D <= report.declared.D + s &&
                          measured.E <= report.declared.E + s &&
                          measured.c0 <= report.declared.c0 + s;
  bool qualification_ok = true;
  if (report.declared_qualification) {
    for (const auto& e : report.qualification)
      if (e.order <= *report.declared_qualification && !e.bounded) qualification_ok = false;
  }
  report.pass = report.constants_pass && qualification_ok;
  return report;
}

bool qualification_sufficient(const SpectralFilter& f, double r) {
  const auto nu = f.declared_qualification();
  if (!nu) return false;
  return *nu >= 0.5 + std::max(r, 1.0);
}

bool qualification_sufficient(const AuditReport& report, double r) {
  const double nu = report.declared_qualification.value_or(report.measured_qualification);
  return nu >= 0.5 + std::max(r, 1.0);
}

}  // namespace rfsr
