#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "motorsim/meanfield_ode.hpp"

using namespace motorsim;

namespace {

ModelParams base_params() {
  ModelParams p;
  p.binding = BindingDensity::gaussian(1.0, 0.5);  // m1 = 1
  return p;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
  return t;
}

}  // namespace

TEST_CASE("rhs vanishes at the stationary point") {
  auto p = base_params();
  p.c_b = 1.3;
  p.c_u = 0.6;
  p.kappa = 2.1;
  p.F = 0.4;
  const MeanFieldState st = stationary(p);
  const MeanFieldDerivs d = rhs(st, p);
  CHECK(std::abs(d.dN) <= 1e-12);
  CHECK(std::abs(d.dv) <= 1e-12);
}

TEST_CASE("rhs at simple states") {
  auto p = base_params();
  const MeanFieldDerivs d0 = rhs({0.0, 0.0}, p);
  CHECK(d0.dN == doctest::Approx(p.c_b));
  CHECK(d0.dv == doctest::Approx(-p.kappa * p.c_b * 1.0));

  p.c_u = 0.0;
  const MeanFieldDerivs d1 = rhs({1.0, -0.8}, p);
  CHECK(d1.dN == doctest::Approx(0.0));
  CHECK(d1.dv == doctest::Approx(-p.kappa * (-0.8)));
}

TEST_CASE("integrated N matches the telegraph closed form to 1e-8") {
  auto p = base_params();
  p.c_b = 1.4;
  p.c_u = 0.7;
  const auto t = linspace(0.0, 10.0, 401);
  const auto traj = integrate(p, {0.0, 0.0}, t);
  const double nbar = p.c_b / (p.c_b + p.c_u);
  double max_err = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double exact = nbar + (0.0 - nbar) * std::exp(-(p.c_b + p.c_u) * t[i]);
    max_err = std::max(max_err, std::abs(traj[i].N - exact));
  }
  CHECK(max_err <= 1e-8);
}

TEST_CASE("long-time limit is the stationary point") {
  auto p = base_params();
  const auto traj = integrate(p, {0.0, 0.0}, std::vector<double>{0.0, 60.0});
  const MeanFieldState st = stationary(p);
  CHECK(std::abs(traj.back().N - st.N) <= 1e-8);
  CHECK(std::abs(traj.back().v - st.v) <= 1e-8);
  CHECK(traj.back().v == doctest::Approx(-1.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("N stays in [0,1] along trajectories started inside") {
  auto p = base_params();
  p.c_b = 2.0;
  p.c_u = 0.3;
  for (double n0 : {0.0, 0.37, 1.0}) {
    const auto traj = integrate(p, {n0, 0.5}, linspace(0.0, 20.0, 201));
    for (const auto& s : traj) {
      CHECK(s.N >= -1e-12);
      CHECK(s.N <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("stationary closed form") {
  auto p = base_params();
  const MeanFieldState st = stationary(p);
  CHECK(st.N == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(st.v == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));

  p.F = 0.8;
  p.c_u = 1e8;
  CHECK(stationary(p).v == doctest::Approx(p.F).epsilon(1e-6));

  // Numerator root: F = kappa c_b m1 / (c_b + c_u) gives v = 0.
  p = base_params();
  p.F = 0.5;
  CHECK(stationary(p).v == doctest::Approx(0.0));

  p.c_u = 0.0;
  CHECK_THROWS_AS(stationary(p), Error);
}

TEST_CASE("velocity limits in c_u") {
  auto p = base_params();
  p.F = 0.4;
  p.c_u = 1e-8;
  CHECK(std::abs(stationary(p).v) < 1e-6);
  p.c_u = 1e8;
  CHECK(stationary(p).v == doctest::Approx(p.F).epsilon(1e-6));
}

TEST_CASE("velocity decreases in c_u near 0 in the weak-force regime") {
  auto p = base_params();
  p.F = 0.3;
  auto v_at = [&](double cu) {
    ModelParams q = p;
    q.c_u = cu;
    return stationary(q).v;
  };
  const double h = 1e-6;
  CHECK((v_at(1e-6 + h) - v_at(1e-6)) / h < 0.0);
}

TEST_CASE("optimal unbinding rate closed forms") {
  auto p = base_params();
  p.c_b = 4.0;
  p.kappa = 9.0;
  CHECK(optimal_unbind_rate(p).c_u_opt == doctest::Approx(6.0).epsilon(1e-9));

  p = base_params();
  auto opt = optimal_unbind_rate(p);
  CHECK(opt.c_u_opt == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(opt.v_opt == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  // kappa = 1 is the one case where the simplified F = 0 speed formula agrees.
  CHECK(extremal_speed_formula(p) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  p.kappa = 4.0;
  opt = optimal_unbind_rate(p);
  CHECK(opt.c_u_opt == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(opt.v_opt == doctest::Approx(0.8).epsilon(1e-9));
  // The simplified formula differs by exactly the factor kappa here.
  CHECK(opt.v_opt == doctest::Approx(p.kappa * extremal_speed_formula(p)).epsilon(1e-12));

  p.F = 10.0;  // >= kappa * m1
  CHECK_THROWS_AS(optimal_unbind_rate(p), Error);
}

TEST_CASE("optimal rate matches the numeric optimizer on random weak-force sets") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    ModelParams p;
    p.binding = BindingDensity::gaussian(0.4 + 1.5 * uni(rng), 0.2 + 0.5 * uni(rng));
    p.c_b = 0.3 + 2.0 * uni(rng);
    p.kappa = 0.4 + 3.0 * uni(rng);
    p.F = 0.8 * p.kappa * p.binding.first_moment() * uni(rng);
    // optimal_unbind_rate cross-checks against golden section internally and
    // throws if the two disagree beyond 1e-6 relative.
    CHECK_NOTHROW(optimal_unbind_rate(p));
  }
}

TEST_CASE("zero-velocity threshold") {
  auto p = base_params();
  p.kappa = 2.0;
  p.F = 1.0;
  const double cu_star = zero_velocity_threshold(p);
  CHECK(cu_star == doctest::Approx(1.0).epsilon(1e-12));
  ModelParams q = p;
  q.c_u = cu_star;
  CHECK(std::abs(stationary(q).v) <= 1e-9);
  q.c_u = cu_star + 0.1;
  CHECK(stationary(q).v > 0.0);
  q.c_u = cu_star - 0.1;
  CHECK(stationary(q).v < 0.0);

  // F -> kappa m1 from below sends the threshold to zero.
  p.F = 2.0 - 1e-9;
  CHECK(zero_velocity_threshold(p) < 1e-8);

  p.F = 0.0;
  CHECK_THROWS_AS(zero_velocity_threshold(p), Error);
}

TEST_CASE("regime classification") {
  auto p = base_params();
  auto r = classify_regime(p);
  CHECK(r.regime == Regime::no_force);
  CHECK(r.c_u_opt.value() == doctest::Approx(std::sqrt(p.c_b * p.kappa)).epsilon(1e-12));
  CHECK(!r.c_u_zero.has_value());

  p.F = 0.5;  // kappa m1 / 2
  r = classify_regime(p);
  CHECK(r.regime == Regime::weak_force);
  CHECK(r.c_u_opt.has_value());
  CHECK(r.c_u_zero.has_value());

  p.F = 2.0;  // 2 kappa m1
  r = classify_regime(p);
  CHECK(r.regime == Regime::strong_force);
  CHECK(!r.c_u_opt.has_value());
  for (double cu : {1e-3, 1.0, 1e3}) {
    ModelParams q = p;
    q.c_u = cu;
    CHECK(stationary(q).v > 0.0);
  }
}

TEST_CASE("stationary is a fixed point for randomized parameters") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ModelParams p;
    p.binding = BindingDensity::gaussian(0.3 + uni(rng), 0.2 + 0.5 * uni(rng));
    p.c_b = 0.2 + 3.0 * uni(rng);
    p.c_u = 0.2 + 3.0 * uni(rng);
    p.kappa = 0.2 + 3.0 * uni(rng);
    p.F = uni(rng);
    const MeanFieldDerivs d = rhs(stationary(p), p);
    CHECK(std::abs(d.dN) <= 1e-12);
    CHECK(std::abs(d.dv) <= 1e-12);
  }
}
