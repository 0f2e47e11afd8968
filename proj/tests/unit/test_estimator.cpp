#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles/oracles.hpp"
#include "rfsr/diagnostics.hpp"
#include "rfsr/errors.hpp"
#include "rfsr/estimator.hpp"

using namespace rfsr;

namespace {

struct Problem {
  Matrix X;
  Vector y;
};

Problem random_problem(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Problem p{Matrix(n, d), Vector(n)};
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) p.X(i, k) = normal(rng);
    p.y(i) = std::sin(p.X(i, 0)) + 0.2 * normal(rng);
  }
  return p;
}

FeatureMap rff(int d, int M, std::uint64_t seed) {
  return FeatureMap::sample(FeatureKind::GaussianRFF, d, M, GaussianRffParams{1.0}, seed);
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("empirical operators") {
  const auto p = random_problem(30, 2, 1);
  const auto map = rff(2, 10, 2);
  const auto zero = assemble_empirical_operators(map, p.X, Vector::Zero(30));
  CHECK(zero.projection.norm() == 0.0);

  const auto one = assemble_empirical_operators(map, p.X.topRows(1), p.y.head(1));
  const Vector e = map.embed(p.X.row(0).transpose());
  CHECK((one.covariance - e * e.transpose()).norm() <= 1e-14);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(one.covariance, Eigen::EigenvaluesOnly);
  int rank = 0;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) rank += eig.eigenvalues()(i) > 1e-12;
  CHECK(rank <= 1);

  NtkParams ntk;
  ntk.activation = Activation::Tanh;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto q = random_problem(25, 3, 100 + s);
    const auto m = FeatureMap::sample(FeatureKind::NtkOneLayer, 3, 8, ntk, s);
    const auto ops = assemble_empirical_operators(m, q.X, q.y);
    const Matrix Z = m.feature_matrix(q.X);
    CHECK(ops.covariance.trace() == doctest::Approx(Z.rowwise().squaredNorm().mean()).epsilon(1e-12));
    CHECK(ops.covariance.trace() <= m.kappa_sq() + 1e-12);
  }
}

TEST_CASE("zero targets give the zero model") {
  const auto p = random_problem(20, 1, 3);
  const auto map = rff(1, 12, 4);
  const auto model = fit_spectral(map, p.X, Vector::Zero(20), SpectralFilter::tikhonov(), 0.1);
  CHECK(model.theta().norm() == 0.0);
  CHECK(model.predict(p.X).norm() == 0.0);
}

TEST_CASE("tikhonov solves the regularized normal equations") {
  const auto p = random_problem(60, 2, 5);
  const auto map = rff(2, 25, 6);
  const double lambda = 0.003;
  const auto model = fit_spectral(map, p.X, p.y, SpectralFilter::tikhonov(), lambda);
  const auto ops = assemble_empirical_operators(map, p.X, p.y);
  const Vector residual = ops.covariance * model.theta() + lambda * model.theta() - ops.projection;
  CHECK(residual.norm() <= 1e-8 * ops.projection.norm());
  CHECK((model.theta() - oracle::ridge_solve(ops.covariance, ops.projection, lambda)).norm() <=
        1e-8 * model.theta().norm());
}

TEST_CASE("tikhonov primal fit equals dual ridge on the feature kernel") {
  const auto p = random_problem(50, 2, 7);
  NtkParams ntk;
  ntk.activation = Activation::Tanh;
  const auto map = FeatureMap::sample(FeatureKind::NtkOneLayer, 2, 10, ntk, 8);  // pM = 40
  const double lambda = 0.02;
  const auto model = fit_spectral(map, p.X, p.y, SpectralFilter::tikhonov(), lambda);
  const Matrix Z = map.feature_matrix(p.X);
  const Vector alpha = oracle::dual_ridge(Z * Z.transpose(), p.y, lambda);
  const Vector dual_pred = Z * Z.transpose() * alpha;
  CHECK((model.predict(p.X) - dual_pred).norm() <= 1e-6 * dual_pred.norm());
}

TEST_CASE("one iteration is alpha times the projection") {
  const auto p = random_problem(40, 1, 9);
  const auto map = rff(1, 15, 10);
  const auto f = SpectralFilter::landweber(0.4);
  const auto fit = fit_iterative(map, p.X, p.y, f, 1);
  const Matrix Z = map.feature_matrix(p.X);
  const Vector expected = 0.4 * Z.transpose() * p.y / 40.0;
  CHECK((fit.model.theta() - expected).norm() <= 1e-14 * expected.norm());
}

TEST_CASE("iterative and spectral paths agree") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> T_dist(1, 400);
  for (int k = 0; k < 20; ++k) {
    const auto p = random_problem(40 + 8 * k, 2, 200 + k);
    const auto map = rff(2, 10 + 2 * k, 300 + k);
    const int T = T_dist(rng);
    for (const auto& f : {SpectralFilter::landweber(1.0), SpectralFilter::heavyball(0.25, 0.75)}) {
      const auto ops = assemble_empirical_operators(map, p.X, p.y);
      const Vector a = iterate(ops, f, T).theta;
      const Vector b = spectral_solution_iterations(ops, f, T);
      CHECK((a - b).norm() <= 1e-8 * b.norm());
    }
  }
}

TEST_CASE("heavyball trajectory with zero momentum equals landweber") {
  const auto p = random_problem(30, 2, 12);
  const auto ops = assemble_empirical_operators(rff(2, 20, 13), p.X, p.y);
  IterativeOptions o;
  o.snapshots = {1, 5, 17, 40};
  const auto a = iterate(ops, SpectralFilter::heavyball(0.6, 0.0), 40, o);
  const auto b = iterate(ops, SpectralFilter::landweber(0.6), 40, o);
  REQUIRE(a.snapshots.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(a.snapshots[i].second == b.snapshots[i].second);
}

TEST_CASE("vector heavyball oracle matches the library iteration") {
  const auto p = random_problem(35, 2, 14);
  const auto ops = assemble_empirical_operators(rff(2, 12, 15), p.X, p.y);
  const Vector ref = oracle::heavyball_vector(ops.covariance, ops.projection, 0.3, 0.6, 77);
  const Vector got = iterate(ops, SpectralFilter::heavyball(0.3, 0.6), 77).theta;
  CHECK((got - ref).norm() <= 1e-12 * ref.norm());
}

TEST_CASE("diverging step is reported") {
  const auto p = random_problem(30, 1, 16);
  const auto ops = assemble_empirical_operators(rff(1, 10, 17), p.X, p.y);
  // Scale the problem so that alpha ||Sigma|| exceeds 2.
  EmpiricalOperators big = ops;
  big.covariance *= 50.0;
  big.projection *= 50.0;
  CHECK_THROWS_AS(iterate(big, SpectralFilter::landweber(1.9), 100), NumericalError);
  CHECK_THROWS_AS(iterate(ops, SpectralFilter::tikhonov(), 10), InvalidArgument);
}

TEST_CASE("training loss is recorded and decreasing for landweber") {
  const auto p = random_problem(50, 1, 18);
  IterativeOptions o;
  o.record_losses = true;
  const auto map = rff(1, 20, 19);
  const auto fit = fit_iterative(map, p.X, p.y, SpectralFilter::landweber(0.5), 50, o);
  REQUIRE(fit.training_losses.size() == 51);
  CHECK(fit.training_losses[0] == doctest::Approx(p.y.squaredNorm() / 50));
  for (std::size_t k = 1; k < fit.training_losses.size(); ++k)
    CHECK(fit.training_losses[k] <= fit.training_losses[k - 1] + 1e-15);
  CHECK(fit.training_losses.back() == doctest::Approx(mse(fit.model, p.X, p.y)).epsilon(1e-10));
}

TEST_CASE("prediction properties") {
  const auto p = random_problem(20, 2, 20);
  const auto map = rff(2, 8, 21);
  const RfModel zero(map, Vector::Zero(8), SpectralFilter::tikhonov(), 0.1, std::nullopt,
                     FitPath::Spectral, {});
  CHECK(zero.predict(p.X).norm() == 0.0);
  Matrix X2(2, 2);
  X2 << 0.1, 0.2, 0.3, 0.4;
  Vector y2(2);
  y2 << 1.0, -1.0;
  CHECK(mse(zero, X2, y2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(mse(zero, Matrix(0, 2), Vector(0)), InvalidArgument);
  CHECK_THROWS_AS(zero.predict(Matrix::Zero(2, 3)), DimensionMismatch);

  std::mt19937_64 rng(22);
  std::normal_distribution<double> normal;
  Vector t1(8), t2(8);
  for (int i = 0; i < 8; ++i) {
    t1(i) = normal(rng);
    t2(i) = normal(rng);
  }
  auto model_of = [&](const Vector& t) {
    return RfModel(map, t, SpectralFilter::tikhonov(), 0.1, std::nullopt, FitPath::Spectral, {});
  };
  const Vector lhs = model_of(2.0 * t1 - 3.0 * t2).predict(p.X);
  const Vector rhs = 2.0 * model_of(t1).predict(p.X) - 3.0 * model_of(t2).predict(p.X);
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
  const RfModel perfect = model_of(t1);
  CHECK(mse(perfect, p.X, perfect.predict(p.X)) == 0.0);
}

TEST_CASE("cutoff interpolates noiseless full-rank data") {
  const auto mu = power_law_spectrum(12, 1.0);
  const auto map = FeatureMap::sample(FeatureKind::DesignerFiniteRank, 1, 12, DesignerParams{mu, 1.0}, 0);
  Matrix X(12, 1);
  for (int i = 0; i < 12; ++i) X(i, 0) = (i + 0.5) / 12.0;
  Vector y(12);
  for (int i = 0; i < 12; ++i) y(i) = std::exp(X(i, 0)) - 0.3 * X(i, 0) * X(i, 0);
  const auto ops = assemble_empirical_operators(map, X, y);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(ops.covariance, Eigen::EigenvaluesOnly);
  const double lambda = 0.5 * eig.eigenvalues()(0);
  REQUIRE(lambda > 0.0);
  const auto model = fit_spectral(map, X, y, SpectralFilter::spectral_cutoff(), lambda);
  CHECK((model.predict(X) - y).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("shuffling training rows leaves theta unchanged") {
  const auto p = random_problem(40, 2, 23);
  const auto map = rff(2, 15, 24);
  std::vector<int> order(40);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(25));
  Matrix Xs(40, 2);
  Vector ys(40);
  for (int i = 0; i < 40; ++i) {
    Xs.row(i) = p.X.row(order[i]);
    ys(i) = p.y(order[i]);
  }
  for (const auto& f : {SpectralFilter::tikhonov(), SpectralFilter::spectral_cutoff()}) {
    const auto a = fit_spectral(map, p.X, p.y, f, 0.01);
    const auto b = fit_spectral(map, Xs, ys, f, 0.01);
    CHECK((a.theta() - b.theta()).norm() <= 1e-10 * std::max(1.0, a.theta().norm()));
  }
  const auto a = fit_iterative(map, p.X, p.y, SpectralFilter::landweber(1.0), 60);
  const auto b = fit_iterative(map, Xs, ys, SpectralFilter::landweber(1.0), 60);
  CHECK((a.model.theta() - b.model.theta()).norm() <= 1e-10 * a.model.theta().norm());
}

TEST_CASE("mse decomposes into bias, variance and cross terms on a designer problem") {
  const auto problem = make_designer_problem(32, 1.0, 0.5, 1.0, 0.3, 1);
  const auto data = sample_dataset(problem, 400, 2);
  const auto map = problem.exact_map();
  const auto model = fit_spectral(map, data.X, data.y, SpectralFilter::tikhonov(), 0.01);
  const auto risk = excess_risk_exact(problem, model);
  const Vector c = fitted_coefficients(problem, model);
  const auto star = compute_f_star(problem, map, SpectralFilter::tikhonov(), 0.01);
  const Vector b = problem.g - star.coefficients;
  const Vector v = star.coefficients - c;
  const double lhs = risk.total * risk.total;
  const double rhs = risk.bias * risk.bias + risk.variance * risk.variance + 2.0 * b.dot(v);
  CHECK(std::abs(lhs - rhs) <= 1e-10);
}

TEST_CASE("spectral cap and lambda range") {
  const auto p = random_problem(10, 1, 26);
  Limits tight;
  tight.max_spectral_dim = 5;
  CHECK_THROWS_AS(fit_spectral(rff(1, 6, 1), p.X, p.y, SpectralFilter::tikhonov(), 0.1, tight),
                  BudgetExceeded);
  CHECK_THROWS_AS(fit_spectral(rff(1, 6, 1), p.X, p.y, SpectralFilter::tikhonov(), 0.0),
                  InvalidArgument);
  CHECK_THROWS_AS(fit_iterative(rff(1, 6, 1), p.X, p.y, SpectralFilter::landweber(1.0), 0),
                  InvalidArgument);
}

}  // TEST_SUITE
