#include "rfsr/feature_map.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rfsr/errors.hpp"

namespace rfsr {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
// Safety margin on the empirical activation bound for unbounded activations.
constexpr double kEmpiricalMargin = 1.1;

double activation_value(Activation a, double t) {
  switch (a) {
    case Activation::Relu:
      return t > 0.0 ? t : 0.0;
    case Activation::Tanh:
      return std::tanh(t);
    case Activation::Identity:
      return t;
  }
  return 0.0;
}

// relu'(0) := 0.
double activation_derivative(Activation a, double t) {
  switch (a) {
    case Activation::Relu:
      return t > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      const double th = std::tanh(t);
      return 1.0 - th * th;
    }
    case Activation::Identity:
      return 1.0;
  }
  return 0.0;
}

void validate_spectrum(const std::vector<double>& mu) {
  if (mu.empty()) throw InvalidArgument("designer map: empty eigenvalue sequence");
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (!(mu[j] > 0.0) || !std::isfinite(mu[j]))
      throw InvalidArgument("designer map: eigenvalues must be positive and finite");
    if (j > 0 && mu[j] > mu[j - 1])
      throw InvalidArgument("designer map: eigenvalues must be non-increasing");
  }
}

}  // namespace

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::GaussianRFF:
      return "gaussian_rff";
    case FeatureKind::NtkOneLayer:
      return "ntk_one_layer";
    case FeatureKind::DesignerFiniteRank:
      return "designer_finite_rank";
    case FeatureKind::DesignerSampled:
      return "designer_sampled";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "gaussian_rff" || name == "gaussian") return FeatureKind::GaussianRFF;
  if (name == "ntk_one_layer" || name == "ntk") return FeatureKind::NtkOneLayer;
  if (name == "designer_finite_rank" || name == "designer") return FeatureKind::DesignerFiniteRank;
  if (name == "designer_sampled") return FeatureKind::DesignerSampled;
  throw InvalidArgument("unknown feature map kind '" + name + "'");
}

std::string to_string(Activation activation) {
  switch (activation) {
    case Activation::Relu:
      return "relu";
    case Activation::Tanh:
      return "tanh";
    case Activation::Identity:
      return "identity";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw InvalidArgument("unknown activation '" + name + "'");
}

std::vector<double> power_law_spectrum(int rank, double b) {
  if (rank < 1) throw InvalidArgument("power_law_spectrum: rank must be >= 1");
  if (!(b > 0.0)) throw InvalidArgument("power_law_spectrum: b must be > 0");
  std::vector<double> mu(static_cast<std::size_t>(rank));
  for (int j = 1; j <= rank; ++j) mu[j - 1] = std::pow(static_cast<double>(j), -1.0 / b);
  return mu;
}

double designer_basis(int j, double x) {
  if (j == 1) return 1.0;
  return kSqrt2 * std::cos(static_cast<double>(j - 1) * std::numbers::pi * x);
}

FeatureMap FeatureMap::sample(FeatureKind kind, int input_dim, int num_samples,
                              FeatureParams params, std::uint64_t seed) {
  if (num_samples < 1) throw InvalidArgument("feature map: number of samples M must be >= 1");
  if (input_dim < 1) throw InvalidArgument("feature map: input dimension must be >= 1");

  FeatureMap map;
  map.kind_ = kind;
  map.input_dim_ = input_dim;
  map.num_samples_ = num_samples;
  map.seed_ = seed;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double M = static_cast<double>(num_samples);

  switch (kind) {
    case FeatureKind::GaussianRFF: {
      const auto* p = std::get_if<GaussianRffParams>(&params);
      if (p == nullptr) throw InvalidArgument("gaussian_rff: wrong parameter type");
      if (!(p->bandwidth > 0.0) || !std::isfinite(p->bandwidth))
        throw InvalidArgument("gaussian_rff: bandwidth must be positive");
      map.component_count_ = 1;
      map.frequencies_.resize(num_samples, input_dim);
      map.phases_.resize(num_samples);
      std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
      for (int m = 0; m < num_samples; ++m) {
        for (int k = 0; k < input_dim; ++k) map.frequencies_(m, k) = normal(rng) / p->bandwidth;
        map.phases_(m) = uniform(rng);
      }
      map.kappa_sq_ = 2.0;
      break;
    }
    case FeatureKind::NtkOneLayer: {
      const auto* p = std::get_if<NtkParams>(&params);
      if (p == nullptr) throw InvalidArgument("ntk: wrong parameter type");
      if (!(p->tau >= 0.0) || !(p->gamma >= 0.0))
        throw InvalidArgument("ntk: tau and gamma must be >= 0");
      if (!(p->input_radius > 0.0)) throw InvalidArgument("ntk: input radius must be positive");
      map.component_count_ = input_dim + 2;
      map.frequencies_.resize(num_samples, input_dim);
      for (int m = 0; m < num_samples; ++m)
        for (int k = 0; k < input_dim; ++k) map.frequencies_(m, k) = normal(rng);
      // |omega^T x| <= ||omega|| rho on the restricted domain.
      const double rho = p->input_radius;
      const double max_norm = map.frequencies_.rowwise().norm().maxCoeff();
      double act_bound = 1.0;
      const double deriv_bound = 1.0;
      if (p->activation == Activation::Tanh) {
        map.kappa_certified_ = true;
      } else {
        act_bound = kEmpiricalMargin * max_norm * rho;
        map.kappa_certified_ = false;
      }
      const double tau2 = p->tau * p->tau;
      map.kappa_sq_ = tau2 * rho * rho * deriv_bound * deriv_bound + act_bound * act_bound +
                      tau2 * p->gamma * p->gamma * deriv_bound * deriv_bound;
      break;
    }
    case FeatureKind::DesignerFiniteRank: {
      const auto* p = std::get_if<DesignerParams>(&params);
      if (p == nullptr) throw InvalidArgument("designer: wrong parameter type");
      validate_spectrum(p->eigenvalues);
      if (input_dim != 1) throw InvalidArgument("designer: input dimension must be 1");
      if (static_cast<std::size_t>(num_samples) != p->eigenvalues.size())
        throw InvalidArgument("designer: M must equal the declared rank J");
      map.component_count_ = 1;
      map.frequencies_.resize(num_samples, 1);
      map.designer_scale_.resize(num_samples);
      double kappa = 0.0;
      double mass = 0.0;
      for (int j = 1; j <= num_samples; ++j) {
        const double mu = p->eigenvalues[j - 1];
        map.frequencies_(j - 1, 0) = j;
        map.designer_scale_(j - 1) = std::sqrt(mu);
        kappa += mu * (j == 1 ? 1.0 : 2.0);
        mass += mu;
      }
      map.kappa_sq_ = kappa;
      map.designer_mass_ = mass;
      break;
    }
    case FeatureKind::DesignerSampled: {
      const auto* p = std::get_if<DesignerParams>(&params);
      if (p == nullptr) throw InvalidArgument("designer_sampled: wrong parameter type");
      validate_spectrum(p->eigenvalues);
      if (input_dim != 1) throw InvalidArgument("designer_sampled: input dimension must be 1");
      double mass = 0.0;
      for (double mu : p->eigenvalues) mass += mu;
      std::discrete_distribution<int> pick(p->eigenvalues.begin(), p->eigenvalues.end());
      map.component_count_ = 1;
      map.frequencies_.resize(num_samples, 1);
      map.designer_scale_.setConstant(num_samples, std::sqrt(mass / M));
      for (int m = 0; m < num_samples; ++m) map.frequencies_(m, 0) = pick(rng) + 1;
      // sup_j sup_x S e_j(x)^2 over the support of the sampling measure.
      map.kappa_sq_ = mass * (p->eigenvalues.size() > 1 ? 2.0 : 1.0);
      map.designer_mass_ = mass;
      break;
    }
  }
  map.params_ = std::move(params);
  return map;
}

void FeatureMap::check_input(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != input_dim_)
    throw DimensionMismatch("feature map: input has dimension " + std::to_string(x.size()) +
                            ", expected " + std::to_string(input_dim_));
  if (kind_ == FeatureKind::NtkOneLayer) {
    const auto& p = std::get<NtkParams>(params_);
    if (x.norm() > p.input_radius)
      throw InvalidArgument("ntk: input norm exceeds the declared domain radius");
  }
}

void FeatureMap::embed_into(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) const {
  check_input(x);
  if (out.size() != embedding_dim()) throw DimensionMismatch("embed_into: output size mismatch");
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(num_samples_));
  const int M = num_samples_;

  switch (kind_) {
    case FeatureKind::GaussianRFF: {
      const double scale = kSqrt2 * inv_sqrt_m;
      for (int m = 0; m < M; ++m) {
        double proj = 0.0;
        for (int k = 0; k < input_dim_; ++k) proj += frequencies_(m, k) * x(k);
        out(m) = scale * std::cos(proj + phases_(m));
      }
      break;
    }
    case FeatureKind::NtkOneLayer: {
      const auto& p = std::get<NtkParams>(params_);
      const int d = input_dim_;
      for (int m = 0; m < M; ++m) {
        double proj = 0.0;
        for (int k = 0; k < d; ++k) proj += frequencies_(m, k) * x(k);
        const double deriv = activation_derivative(p.activation, proj);
        for (int i = 0; i < d; ++i) out(i * M + m) = inv_sqrt_m * p.tau * x(i) * deriv;
        out(d * M + m) = inv_sqrt_m * activation_value(p.activation, proj);
        out((d + 1) * M + m) = inv_sqrt_m * p.tau * p.gamma * deriv;
      }
      break;
    }
    case FeatureKind::DesignerFiniteRank:
    case FeatureKind::DesignerSampled: {
      for (int m = 0; m < M; ++m) {
        const int j = static_cast<int>(frequencies_(m, 0));
        out(m) = designer_scale_(m) * designer_basis(j, x(0));
      }
      break;
    }
  }
}

Vector FeatureMap::embed(const Eigen::Ref<const Vector>& x) const {
  Vector out(embedding_dim());
  embed_into(x, out);
  return out;
}

double FeatureMap::approx_kernel(const Eigen::Ref<const Vector>& x,
                                 const Eigen::Ref<const Vector>& y) const {
  return embed(x).dot(embed(y));
}

Matrix FeatureMap::feature_matrix(const Matrix& X, const Limits& limits) const {
  if (X.rows() > 0 && X.cols() != input_dim_)
    throw DimensionMismatch("feature_matrix: rows have dimension " + std::to_string(X.cols()) +
                            ", expected " + std::to_string(input_dim_));
  const auto n = static_cast<std::size_t>(X.rows());
  const auto width = static_cast<std::size_t>(embedding_dim());
  if (width != 0 && n > limits.max_feature_entries / width)
    throw BudgetExceeded("feature_matrix: " + std::to_string(n) + " x " + std::to_string(width) +
                         " exceeds the feature-entry budget of " +
                         std::to_string(limits.max_feature_entries));
  Matrix Z(X.rows(), embedding_dim());
  Vector row(embedding_dim());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    embed_into(X.row(i).transpose(), row);
    Z.row(i) = row.transpose();
  }
  return Z;
}

nlohmann::json FeatureMap::descriptor() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["input_dim"] = input_dim_;
  j["num_samples"] = num_samples_;
  j["seed"] = seed_;
  nlohmann::json params;
  std::visit(
      [&params](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GaussianRffParams>) {
          params["bandwidth"] = p.bandwidth;
        } else if constexpr (std::is_same_v<P, NtkParams>) {
          params["activation"] = to_string(p.activation);
          params["tau"] = p.tau;
          params["gamma"] = p.gamma;
          params["input_radius"] = p.input_radius;
        } else {
          params["eigenvalues"] = p.eigenvalues;
          params["decay_exponent"] = p.decay_exponent;
        }
      },
      params_);
  j["params"] = params;
  return j;
}

FeatureMap FeatureMap::from_descriptor(const nlohmann::json& descriptor) {
  try {
    const FeatureKind kind = feature_kind_from_string(descriptor.at("kind").get<std::string>());
    const int input_dim = descriptor.at("input_dim").get<int>();
    const int num_samples = descriptor.at("num_samples").get<int>();
    const auto seed = descriptor.at("seed").get<std::uint64_t>();
    const auto& p = descriptor.at("params");
    FeatureParams params;
    switch (kind) {
      case FeatureKind::GaussianRFF:
        params = GaussianRffParams{p.at("bandwidth").get<double>()};
        break;
      case FeatureKind::NtkOneLayer:
        params = NtkParams{activation_from_string(p.at("activation").get<std::string>()),
                           p.at("tau").get<double>(), p.at("gamma").get<double>(),
                           p.value("input_radius", 10.0)};
        break;
      case FeatureKind::DesignerFiniteRank:
      case FeatureKind::DesignerSampled:
        params = DesignerParams{p.at("eigenvalues").get<std::vector<double>>(),
                                p.value("decay_exponent", 1.0)};
        break;
    }
    return sample(kind, input_dim, num_samples, std::move(params), seed);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("feature map descriptor: ") + e.what());
  }
}

}  // namespace rfsr
