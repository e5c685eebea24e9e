#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "motorsim/meanfield_ode.hpp"
#include "motorsim/meanfield_pde.hpp"
#include "motorsim/quadrature.hpp"

using namespace motorsim;

namespace {

ModelParams base_params() {
  ModelParams p;
  p.binding = BindingDensity::gaussian(1.0, 0.5);
  return p;
}

PdeConfig grid_for(const ModelParams& p, int cells, double t_end) {
  PdeConfig cfg = default_grid(p, cells, t_end);
  cfg.series_dt = 0.01;
  return cfg;
}

double l1_distance(const DensityField& a, const DensityField& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.n.size(); ++j) s += std::abs(a.n[j] - b.n[j]);
  return s * a.dx;
}

}  // namespace

TEST_CASE("velocity_of simple fields") {
  auto p = base_params();
  p.F = 0.4;
  DensityField f = make_field(-4.0, 4.0, 800);
  CHECK(velocity_of(f, p) == doctest::Approx(p.F));

  // Approximate point mass 0.5 at x = 1 with kappa = 2: v -> -1 + F.
  p.kappa = 2.0;
  const std::size_t j1 = static_cast<std::size_t>((1.0 - f.x_min) / f.dx);
  f.n[j1] = 0.5 / f.dx;
  CHECK(velocity_of(f, p) == doctest::Approx(-1.0 + p.F).epsilon(1e-9));

  // Symmetric field about 0: v = F up to quadrature error.
  DensityField g = make_field(-4.0, 4.0, 800);
  for (std::size_t j = 0; j < g.n.size(); ++j) {
    const double x = g.x_at(j);
    g.n[j] = 0.3 * std::exp(-x * x);
  }
  CHECK(velocity_of(g, p) == doctest::Approx(p.F).epsilon(1e-10));
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const std::size_t J = 513;
  std::vector<double> n(J), b(J), a(J + 1), out_s(J), out_p(J);
  for (auto& x : n) x = uni(rng);
  for (auto& x : b) x = uni(rng);
  for (auto& x : a) x = uni(rng) - 0.5;
  kernels::upwind_step_serial(n, out_s, a, 0.4, b, 0.01, 0.005);
  kernels::upwind_step_parallel(n, out_p, a, 0.4, b, 0.01, 0.005);
  for (std::size_t j = 0; j < J; ++j) CHECK(out_s[j] == out_p[j]);
}

TEST_CASE("zeroth moment follows the telegraph equation") {
  auto p = base_params();
  const PdeConfig cfg = grid_for(p, 2000, 5.0);
  const PdeResult res = evolve(make_field(cfg.x_min, cfg.x_max, cfg.cells), p, cfg);
  const double nbar = p.c_b / (p.c_b + p.c_u);
  double max_err = 0.0;
  for (const auto& row : res.series) {
    const double exact = nbar * (1.0 - std::exp(-(p.c_b + p.c_u) * row.t));
    max_err = std::max(max_err, std::abs(row.N - exact));
  }
  CHECK(max_err <= 1e-3);
}

TEST_CASE("PDE (N, v) series matches the moment ODE") {
  auto p = base_params();
  const PdeConfig cfg = grid_for(p, 2000, 5.0);
  const PdeResult res = evolve(make_field(cfg.x_min, cfg.x_max, cfg.cells), p, cfg);
  std::vector<double> t_grid;
  for (const auto& row : res.series) t_grid.push_back(row.t);
  const auto ode = integrate(p, {0.0, 0.0}, t_grid);
  double max_err = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    max_err = std::max(max_err, std::abs(res.series[i].N - ode[i].N));
    max_err = std::max(max_err, std::abs(res.series[i].v - ode[i].v));
  }
  CHECK(max_err <= 1e-3);
}

TEST_CASE("positivity and mass bound hold along the evolution") {
  auto p = base_params();
  p.c_b = 2.0;
  p.c_u = 0.4;
  PdeConfig cfg = grid_for(p, 1200, 8.0);
  cfg.snapshot_times = {2.0, 8.0};
  const PdeResult res = evolve(make_field(cfg.x_min, cfg.x_max, cfg.cells), p, cfg);
  for (const auto& row : res.series) CHECK(row.N <= 1.0 + 1e-6);
  for (const auto& f : res.snapshots)
    for (double v : f.n) CHECK(v >= 0.0);
}

TEST_CASE("advection-decay analytic case converges at first order") {
  // Negligible binding and returning force: n(x,t) = e^{-c_u t} n0(x - F t).
  ModelParams p;
  p.binding = BindingDensity::gaussian(1.0, 0.3);
  p.c_b = 1e-12;
  p.c_u = 0.5;
  p.kappa = 1e-12;
  p.F = 0.8;
  const double t_end = 2.0;

  auto initial = [&](double x) {
    return 0.4 * std::exp(-(x - 1.0) * (x - 1.0) / (2.0 * 0.09)) / std::sqrt(2.0 * M_PI * 0.09);
  };
  std::vector<double> errors;
  for (int cells : {500, 1000, 2000}) {
    PdeConfig cfg;
    cfg.x_min = -4.0;
    cfg.x_max = 8.0;
    cfg.cells = cells;
    cfg.t_end = t_end;
    cfg.series_dt = 0.5;
    cfg.snapshot_times = {t_end};
    DensityField f0 = make_field(cfg.x_min, cfg.x_max, cells);
    for (std::size_t j = 0; j < f0.n.size(); ++j) f0.n[j] = initial(f0.x_at(j));
    const PdeResult res = evolve(f0, p, cfg);
    const DensityField& fT = res.snapshots.back();
    double err = 0.0;
    for (std::size_t j = 0; j < fT.n.size(); ++j)
      err += std::abs(fT.n[j] - std::exp(-p.c_u * t_end) * initial(fT.x_at(j) - p.F * t_end));
    errors.push_back(err * fT.dx);
  }
  // First-order scheme: each refinement shrinks the L1 error by >= 1.7,
  // i.e. observed order >= 0.8.
  CHECK(errors[0] / errors[1] >= 1.7);
  CHECK(errors[1] / errors[2] >= 1.7);
}

TEST_CASE("stationary profile identities") {
  auto p = base_params();
  p.c_b = 1.2;
  p.c_u = 0.8;
  p.kappa = 1.5;
  const MeanFieldState st = stationary(p);
  REQUIRE(st.v < 0.0);
  auto [lo, hi] = p.binding.essential_support();
  const double reach = 45.0 * std::abs(st.v) / p.c_u;
  const double mass = adaptive_quadrature(
      [&](double x) { return stationary_profile_value(p, x); }, lo - reach, hi, 1e-11);
  CHECK(std::abs(mass - st.N) <= 1e-8);
  const double moment = adaptive_quadrature(
      [&](double x) { return x * stationary_profile_value(p, x); }, lo - reach, hi, 1e-10);
  CHECK(std::abs(-p.kappa * moment + p.F - st.v) <= 1e-6);
}

TEST_CASE("stationary profile normalization for randomized parameters") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    ModelParams p;
    p.binding = BindingDensity::gaussian(0.5 + uni(rng), 0.2 + 0.4 * uni(rng));
    p.c_b = 0.4 + 2.0 * uni(rng);
    p.c_u = 0.4 + 2.0 * uni(rng);
    p.kappa = 0.4 + 2.0 * uni(rng);
    p.F = 0.3 * uni(rng);
    const MeanFieldState st = stationary(p);
    if (std::abs(st.v) < 1e-3) continue;
    auto [lo, hi] = p.binding.essential_support();
    const double reach = 45.0 * std::abs(st.v) / p.c_u;
    const double mass = adaptive_quadrature(
        [&](double x) { return stationary_profile_value(p, x); },
        st.v < 0.0 ? lo - reach : lo, st.v < 0.0 ? hi : hi + reach, 1e-11);
    CHECK(std::abs(mass - st.N) <= 1e-8);
  }
}

TEST_CASE("zero stationary velocity returns the pointwise balance") {
  auto p = base_params();
  p.F = 0.5;  // kappa c_b m1 / (c_b + c_u) exactly
  REQUIRE(stationary(p).v == 0.0);
  const double x = 1.3;
  const double expected = p.c_b * (1.0 - 0.5) / p.c_u * p.binding.pdf(x);
  CHECK(stationary_profile_value(p, x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("long-time PDE field approaches the stationary profile") {
  auto p = base_params();
  PdeConfig cfg = grid_for(p, 2000, 30.0);
  cfg.snapshot_times = {30.0};
  const PdeResult res = evolve(make_field(cfg.x_min, cfg.x_max, cfg.cells), p, cfg);
  const DensityField ref = stationary_profile(p, cfg);
  CHECK(l1_distance(res.snapshots.back(), ref) <= 1e-2);
}

TEST_CASE("single-motor equation: occupancy and concentration") {
  auto p = base_params();
  p.c_b = 1.1;
  p.c_u = 0.9;
  PdeConfig cfg = grid_for(p, 2000, 12.0);
  const PdeResult res =
      single_motor_evolve(make_field(cfg.x_min, cfg.x_max, cfg.cells), p, cfg);
  // Bound mass follows 1 - P(t) with P from the two-state closed form.
  const double lam = p.c_b + p.c_u;
  double max_err = 0.0;
  for (const auto& row : res.series) {
    const double bound_exact = p.c_b / lam * (1.0 - std::exp(-lam * row.t));
    max_err = std::max(max_err, std::abs(row.N - bound_exact));
  }
  CHECK(max_err <= 1e-3);
  CHECK(std::abs(res.series.back().N - p.c_b / lam) <= 1e-3);

  // Stiffer motors concentrate nearer zero. The single-motor drift -kappa x
  // never moves mass outside [min(lo,0), max(hi,0)], so a tight explicit
  // domain keeps the stiff cases resolvable.
  std::vector<double> far_mass;
  for (double kappa : {1.0, 10.0, 100.0}) {
    ModelParams q = p;
    q.kappa = kappa;
    PdeConfig c2;
    c2.x_min = -3.5;
    c2.x_max = 5.5;
    c2.cells = 900;
    c2.t_end = 6.0;
    c2.series_dt = 0.05;
    c2.snapshot_times = {6.0};
    const PdeResult r2 =
        single_motor_evolve(make_field(c2.x_min, c2.x_max, c2.cells), q, c2);
    const DensityField& f = r2.snapshots.back();
    double mass = 0.0;
    for (std::size_t j = 0; j < f.n.size(); ++j)
      if (std::abs(f.x_at(j)) > 0.1) mass += f.n[j];
    far_mass.push_back(mass * f.dx);
  }
  CHECK(far_mass[0] > far_mass[1]);
  CHECK(far_mass[1] > far_mass[2]);
}

TEST_CASE("mass reaching the boundary raises DomainOverflow") {
  ModelParams p;
  p.binding = BindingDensity::uniform(0.0, 1.0);
  p.F = -2.0;  // strong leftward drift
  PdeConfig cfg;
  cfg.x_min = -1.5;
  cfg.x_max = 1.5;
  cfg.cells = 300;
  cfg.t_end = 5.0;
  cfg.series_dt = 0.05;
  CHECK_THROWS_AS(evolve(make_field(cfg.x_min, cfg.x_max, cfg.cells), p, cfg), Error);
}
