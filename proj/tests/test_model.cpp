#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "motorsim/model.hpp"
#include "motorsim/quadrature.hpp"

using namespace motorsim;

namespace {

ModelParams base_params() {
  ModelParams p;
  p.binding = BindingDensity::gaussian(1.0, 0.5);
  return p;
}

// Quadrature oracle for ∫ f(x) b(x) dx, independent of the closed forms.
template <typename F>
double weighted_quadrature(const BindingDensity& b, F&& f) {
  auto [lo, hi] = b.essential_support();
  return adaptive_quadrature([&](double x) { return f(x) * b.pdf(x); }, lo, hi, 1e-12);
}

}  // namespace

TEST_CASE("validate_params accepts a well-formed model") {
  auto p = base_params();
  CHECK_NOTHROW(validate_params(p));
}

TEST_CASE("validate_params rejects invalid inputs with the right codes") {
  auto p = base_params();
  p.binding = BindingDensity::gaussian(-1.0, 0.5);
  CHECK_THROWS_WITH_AS(validate_params(p), doctest::Contains("first moment"), Error);
  try {
    validate_params(p);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveFirstMoment);
  }

  p = base_params();
  p.c_b = 0.0;
  try {
    validate_params(p);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveRate);
  }

  p = base_params();
  p.kappa = -1.0;
  try {
    validate_params(p);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveRate);
  }

  p = base_params();
  p.c_u = -0.1;
  try {
    validate_params(p);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeRate);
  }

  p = base_params();
  p.binding = BindingDensity::uniform(2.0, 1.0);
  try {
    validate_params(p);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnnormalizedDensity);
  }
}

TEST_CASE("point-mass gaussian moments") {
  const auto b = BindingDensity::gaussian(1.0, 0.0);
  const double alpha = 1.7;
  const auto m = moments(b, alpha);
  CHECK(m.m1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.mc == doctest::Approx(std::cos(alpha)).epsilon(1e-15));
  CHECK(m.ms == doctest::Approx(std::sin(alpha)).epsilon(1e-15));
}

TEST_CASE("gaussian trig moments against the closed form and quadrature") {
  const auto b = BindingDensity::gaussian(1.0, 0.5);
  const double alpha = 2.0;
  const double expected = std::exp(-0.5) * std::cos(2.0);
  CHECK(b.cos_moment(alpha) == doctest::Approx(expected).epsilon(1e-12));
  const double oracle = weighted_quadrature(b, [&](double x) { return std::cos(alpha * x); });
  CHECK(b.cos_moment(alpha) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("uniform(0,2) moments at alpha = pi") {
  const auto b = BindingDensity::uniform(0.0, 2.0);
  const double pi = std::acos(-1.0);
  CHECK(b.first_moment() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b.sin_moment(pi) == doctest::Approx(0.0).epsilon(1e-14));
  const double oracle = weighted_quadrature(b, [&](double x) { return std::sin(pi * x); });
  CHECK(std::abs(b.sin_moment(pi) - oracle) < 1e-10);
}

TEST_CASE("moment identities and quadrature agreement over randomized families") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    BindingDensity b;
    switch (trial % 3) {
      case 0: b = BindingDensity::gaussian(0.3 + 2.0 * uni(rng), 0.1 + uni(rng)); break;
      case 1: {
        const double a = -0.5 + uni(rng);
        b = BindingDensity::uniform(a, a + 0.5 + 2.0 * uni(rng));
        break;
      }
      default: b = BindingDensity::shifted_exponential(-0.2 + uni(rng), 0.5 + 2.0 * uni(rng));
    }
    const double alpha = 0.1 + 3.0 * uni(rng);

    CHECK(std::abs(density_mass_quadrature(b) - 1.0) <= 1e-10);
    CHECK(b.cos_moment(0.0) == 1.0);
    CHECK(b.sin_moment(0.0) == 0.0);
    CHECK(std::abs(b.cos_moment(alpha)) <= 1.0 + 1e-12);
    CHECK(std::abs(b.sin_moment(alpha)) <= 1.0 + 1e-12);

    const double m1_q = weighted_quadrature(b, [](double x) { return x; });
    CHECK(b.first_moment() == doctest::Approx(m1_q).epsilon(1e-9));
    const double mc_q = weighted_quadrature(b, [&](double x) { return std::cos(alpha * x); });
    const double ms_q = weighted_quadrature(b, [&](double x) { return std::sin(alpha * x); });
    CHECK(std::abs(b.cos_moment(alpha) - mc_q) < 1e-9);
    CHECK(std::abs(b.sin_moment(alpha) - ms_q) < 1e-9);
  }
}

TEST_CASE("hyperbolic moments match quadrature where finite") {
  const auto bu = BindingDensity::uniform(0.0, 2.0);
  const double ch_q = weighted_quadrature(bu, [](double x) { return std::cosh(x); });
  const double sh_q = weighted_quadrature(bu, [](double x) { return std::sinh(x); });
  CHECK(std::abs(bu.cosh_moment(1.0) - ch_q) < 1e-9);
  CHECK(std::abs(bu.sinh_moment(1.0) - sh_q) < 1e-9);

  const auto bg = BindingDensity::gaussian(0.8, 0.4);
  const double g_q = weighted_quadrature(bg, [](double x) { return std::cosh(0.7 * x); });
  CHECK(bg.cosh_moment(0.7) == doctest::Approx(g_q).epsilon(1e-9));

  const auto be = BindingDensity::shifted_exponential(0.1, 2.0);
  // The quadrature oracle truncates the support where the weighted tail is
  // ~e^{-(lambda-alpha) L} ~ 1e-7, so compare at that level.
  const double e_q = weighted_quadrature(be, [](double x) { return std::sinh(1.2 * x); });
  CHECK(be.sinh_moment(1.2) == doctest::Approx(e_q).epsilon(1e-6));
  CHECK_THROWS_AS(be.cosh_moment(2.5), Error);
}
