#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "rfsr/errors.hpp"
#include "rfsr/spectral_filter.hpp"

using namespace rfsr;

TEST_SUITE("spectral_filter") {

TEST_CASE("tikhonov values and residual") {
  const auto f = SpectralFilter::tikhonov();
  CHECK(f.value(0.5, 0.5) == doctest::Approx(1.0));
  CHECK(f.residual(1.0, 0.1) == doctest::Approx(0.1 / 1.1).epsilon(1e-14));
  CHECK(f.residual(0.3, 0.2) == doctest::Approx(0.2 / 0.5));
}

TEST_CASE("one landweber step is the step size") {
  for (double alpha : {0.1, 0.5, 1.0, 1.7}) {
    const auto f = SpectralFilter::landweber(alpha);
    for (double t : {1e-6, 0.01, 0.3, 1.0}) CHECK(f.evaluate_iterations(t, 1) == doctest::Approx(alpha));
    CHECK(f.evaluate_iterations(0.0, 1) == doctest::Approx(alpha));
  }
}

TEST_CASE("landweber matches the explicit geometric sum") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double alpha = 0.05 + 1.9 * u(rng);
    const double t = u(rng);
    const int T = 1 + static_cast<int>(300 * u(rng));
    const double ref = oracle::landweber_sum(t, alpha, T);
    CHECK(SpectralFilter::landweber(alpha).evaluate_iterations(t, T) ==
          doctest::Approx(ref).epsilon(1e-11));
  }
  CHECK(SpectralFilter::landweber(0.5).evaluate_iterations(0.0, 40) == doctest::Approx(20.0));
}

TEST_CASE("heavyball without momentum is landweber") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double alpha = 0.05 + 1.9 * u(rng);
    const double t = u(rng);
    const int T = 1 + static_cast<int>(200 * u(rng));
    const double hb = SpectralFilter::heavyball(alpha, 0.0).evaluate_iterations(t, T);
    const double lw = SpectralFilter::landweber(alpha).evaluate_iterations(t, T);
    CHECK(std::abs(hb - lw) <= 1e-12 * std::max(1.0, std::abs(lw)));
  }
}

TEST_CASE("heavyball scalar recurrence equals the vector iteration") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double beta = 0.95 * u(rng);
    const double alpha = (0.05 + 0.9 * u(rng)) * (1.0 + beta);
    const double t = u(rng);
    const int T = 1 + static_cast<int>(150 * u(rng));
    const double ref = oracle::heavyball_scalar(t, alpha, beta, T);
    const double got = SpectralFilter::heavyball(alpha, beta).evaluate_iterations(t, T);
    CHECK(std::abs(got - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("vector evaluation agrees with scalar evaluation") {
  const auto f = SpectralFilter::heavyball(0.3, 0.6);
  std::vector<double> ts = {0.0, 1e-5, 0.01, 0.2, 0.7, 1.0, 1.3};
  const auto v = f.evaluate_iterations(ts, 57);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(v[i] == f.evaluate_iterations(ts[i], 57));
}

TEST_CASE("residual at small t tends to one") {
  const SpectralFilter filters[] = {SpectralFilter::tikhonov(), SpectralFilter::spectral_cutoff(),
                                    SpectralFilter::landweber(1.0), SpectralFilter::heavyball(0.25, 0.75)};
  for (const auto& f : filters) CHECK(f.residual(1e-12, 0.01) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("spectral cutoff inverts above lambda") {
  const auto f = SpectralFilter::spectral_cutoff();
  CHECK(f.residual(0.5, 0.5) == 0.0);
  CHECK(f.residual(0.9, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(f.value(0.4, 0.5) == 0.0);
  CHECK(f.value(0.5, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("filter value range checks") {
  const auto f = SpectralFilter::tikhonov();
  CHECK_THROWS_AS(f.value(0.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(f.value(1.5, 0.5), InvalidArgument);
  CHECK_THROWS_AS(f.value(0.5, 0.0), InvalidArgument);
  CHECK_THROWS_AS(f.value(0.5, 2.0), InvalidArgument);
  CHECK_THROWS_AS(f.residual(-0.1, 0.5), InvalidArgument);
  CHECK_THROWS_AS(SpectralFilter::landweber(2.0), InvalidArgument);
  CHECK_THROWS_AS(SpectralFilter::heavyball(0.5, 1.0), InvalidArgument);
}

TEST_CASE("iteration and lambda conversions") {
  CHECK(SpectralFilter::landweber(1.0).lambda_for_iterations(100) == doctest::Approx(0.01));
  CHECK(iterations_for_lambda(SpectralFilter::landweber(1.0), 0.013) == 77);
  CHECK(lambda_for_iterations(SpectralFilter::heavyball(0.5, 0.5), 10) == doctest::Approx(0.1));
  CHECK(SpectralFilter::landweber(1.0).iterations_for_lambda(0.01) == 100);
  CHECK_THROWS_AS(SpectralFilter::tikhonov().lambda_for_iterations(5), InvalidArgument);
  CHECK_THROWS_AS(SpectralFilter::spectral_cutoff().iterations_for_lambda(0.1), InvalidArgument);
}

TEST_CASE("default step rules") {
  const auto lw = SpectralFilter::default_landweber(4.0);
  CHECK(lw.step_size() == doctest::Approx(0.25));
  const auto hb = SpectralFilter::default_heavyball(2.0);
  CHECK(hb.step_size() == doctest::Approx(0.125));
  CHECK(hb.momentum() <= 0.9);
  CHECK(hb.effective_step() <= 1.0 + 1e-15);
}

TEST_CASE("audit of tikhonov shows saturation") {
  const auto report = audit_filter(SpectralFilter::tikhonov());
  CHECK(report.pass);
  CHECK(report.measured.D <= 1.0 + 1e-12);
  CHECK(report.measured.E <= 1.0 + 1e-12);
  CHECK(report.measured.c0 <= 1.0 + 1e-12);
  REQUIRE(report.entry(1.0) != nullptr);
  CHECK(report.entry(1.0)->bounded);
  CHECK(report.entry(1.0)->measured <= 1.0 + 1e-12);
  REQUIRE(report.entry(2.0) != nullptr);
  CHECK_FALSE(report.entry(2.0)->bounded);
  CHECK(report.measured_qualification == doctest::Approx(1.0));
}

TEST_CASE("audit of spectral cutoff and landweber") {
  const auto cut = audit_filter(SpectralFilter::spectral_cutoff());
  CHECK(cut.pass);
  for (double q : {0.5, 1.0, 2.0, 4.0}) {
    REQUIRE(cut.entry(q) != nullptr);
    CHECK(cut.entry(q)->bounded);
    CHECK(cut.entry(q)->measured <= 1.0 + 1e-12);
  }
  const auto lw = audit_filter(SpectralFilter::landweber(1.0));
  CHECK(lw.pass);
  CHECK(lw.measured.D <= 1.0 + 1e-12);
  CHECK(lw.measured.D >= 0.99);
  for (double q : {0.5, 1.0, 2.0, 4.0}) CHECK(lw.entry(q)->bounded);
}

TEST_CASE("audit of heavyball stays within the declared constants") {
  const auto report = audit_filter(SpectralFilter::default_heavyball(1.0));
  CHECK(report.constants_pass);
  CHECK_FALSE(report.declared_qualification.has_value());
  CHECK(report.measured_qualification >= 1.0);
}

TEST_CASE("qualification is monotone in the order") {
  const SpectralFilter filters[] = {SpectralFilter::tikhonov(), SpectralFilter::spectral_cutoff(),
                                    SpectralFilter::landweber(0.7), SpectralFilter::heavyball(0.25, 0.75)};
  for (const auto& f : filters) {
    const auto report = audit_filter(f);
    for (std::size_t k = 1; k < report.qualification.size(); ++k)
      if (report.qualification[k].bounded) CHECK(report.qualification[k - 1].bounded);
  }
}

TEST_CASE("qualification gate") {
  CHECK(qualification_sufficient(SpectralFilter::tikhonov(), 0.25) == false);
  CHECK(qualification_sufficient(SpectralFilter::tikhonov(), 0.5) == false);
  for (double r : {0.25, 0.5, 1.0, 3.0}) {
    CHECK(qualification_sufficient(SpectralFilter::spectral_cutoff(), r));
    CHECK(qualification_sufficient(SpectralFilter::landweber(1.0), r));
  }
  const auto report = audit_filter(SpectralFilter::landweber(1.0));
  CHECK(qualification_sufficient(report, 1.0));
}

TEST_CASE("audit json shape") {
  const auto j = audit_filter(SpectralFilter::tikhonov()).to_json();
  CHECK(j.contains("filter"));
  CHECK(j.contains("constants_declared"));
  CHECK(j.contains("constants_measured"));
  CHECK(j.contains("pass"));
  CHECK(j["filter"] == "tikhonov");
}

TEST_CASE("filter descriptor round trip") {
  const SpectralFilter filters[] = {SpectralFilter::tikhonov(), SpectralFilter::spectral_cutoff(),
                                    SpectralFilter::landweber(0.7), SpectralFilter::heavyball(0.25, 0.75)};
  for (const auto& f : filters) {
    const auto back = SpectralFilter::from_descriptor(f.descriptor());
    CHECK(back.kind() == f.kind());
    CHECK(back.step_size() == f.step_size());
    CHECK(back.momentum() == f.momentum());
  }
}

}  // TEST_SUITE
