#include "motorsim/meanfield_pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "motorsim/meanfield_ode.hpp"
#include "motorsim/nonlinear.hpp"
#include "motorsim/quadrature.hpp"

namespace motorsim {

double DensityField::mass() const {
  double s = 0.0;
  for (std::size_t j = 0; j < n.size(); ++j)
    s += (j == 0 || j + 1 == n.size()) ? 0.5 * n[j] : n[j];
  return s * dx;
}

double DensityField::first_moment() const {
  return moment_of([](double x) { return x; });
}

DensityField make_field(double x_min, double x_max, int cells) {
  if (cells < 2 || !(x_max > x_min))
    throw Error(ErrorCode::ConfigError, "invalid PDE grid");
  DensityField f;
  f.x_min = x_min;
  f.dx = (x_max - x_min) / cells;
  f.n.assign(cells + 1, 0.0);
  return f;
}

PdeConfig default_grid(const ModelParams& p, int cells, double t_end) {
  auto [lo, hi] = p.binding.essential_support();
  const double m1 = p.binding.first_moment();
  const double pad =
      std::abs(m1) + 16.0 * (p.kappa * std::abs(m1) + std::abs(p.F)) / std::max(p.c_u, 0.1);
  PdeConfig cfg;
  cfg.x_min = lo - pad;
  cfg.x_max = hi + pad;
  cfg.cells = cells;
  cfg.t_end = t_end;
  return cfg;
}

double velocity_of(const DensityField& field, const ModelParams& p) {
  return -p.kappa * field.first_moment() + p.F;
}

namespace kernels {

void upwind_step_serial(std::span<const double> n, std::span<double> out,
                        std::span<const double> a_iface, double dt_over_dx,
                        std::span<const double> b, double bind_dt, double decay_dt) {
  const std::size_t J = n.size();
  auto flux = [&](std::size_t i) {
    const double a = a_iface[i];
    const double up = a > 0.0 ? (i == 0 ? 0.0 : n[i - 1]) : (i == J ? 0.0 : n[i]);
    return a * up;
  };
  for (std::size_t j = 0; j < J; ++j)
    out[j] = n[j] - dt_over_dx * (flux(j + 1) - flux(j)) + bind_dt * b[j] - decay_dt * n[j];
}

void upwind_step_parallel(std::span<const double> n, std::span<double> out,
                          std::span<const double> a_iface, double dt_over_dx,
                          std::span<const double> b, double bind_dt, double decay_dt) {
  const std::size_t J = n.size();
  auto flux = [&](std::size_t i) {
    const double a = a_iface[i];
    const double up = a > 0.0 ? (i == 0 ? 0.0 : n[i - 1]) : (i == J ? 0.0 : n[i]);
    return a * up;
  };
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(J); ++j)
    out[j] = n[j] - dt_over_dx * (flux(j + 1) - flux(j)) + bind_dt * b[j] - decay_dt * n[j];
}

}  // namespace kernels

namespace {

struct StepPlan {
  std::vector<double> b_grid;
  std::vector<double> a_iface;
};

void check_domain(const ModelParams& p, const PdeConfig& cfg) {
  if (p.binding.is_point_mass())
    throw Error(ErrorCode::ConfigError, "point-mass binding density not representable on a grid");
  auto [lo, hi] = p.binding.essential_support();
  if (lo < cfg.x_min || hi > cfg.x_max)
    throw Error(ErrorCode::ConfigError, "PDE domain does not contain the binding-density support");
}

void check_boundaries(const DensityField& f, double v) {
  // Mass within 2 dx of the outflow boundary must stay negligible.
  const std::size_t J = f.n.size();
  double edge = 0.0;
  if (v >= 0.0)
    edge = (0.5 * f.n[J - 1] + f.n[J - 2] + f.n[J - 3]) * f.dx;
  else
    edge = (0.5 * f.n[0] + f.n[1] + f.n[2]) * f.dx;
  if (edge > 1e-6)
    throw Error(ErrorCode::DomainOverflow, "density reached the grid boundary; enlarge the domain");
}

double closure_weight(const ForceSpec& spec, double x) {
  switch (spec.family) {
    case ForceFamily::sine: return std::cos(spec.alpha * x);
    case ForceFamily::sinh_family: return std::cosh(spec.alpha * x);
    case ForceFamily::linear: return 0.0;
  }
  return 0.0;
}

PdeResult run_scheme(DensityField field, const ModelParams& p, const PdeConfig& cfg,
                     const ForceSpec& spec, bool single_motor) {
  validate_params(p);
  check_domain(p, cfg);
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0))
    throw Error(ErrorCode::ConfigError, "cfl must be in (0, 1]");
  if (field.n.size() != static_cast<std::size_t>(cfg.cells) + 1)
    throw Error(ErrorCode::ConfigError, "field does not match the configured grid");

  const std::size_t J = field.n.size();
  const double dx = field.dx;
  const double x_abs = std::max(std::abs(cfg.x_min), std::abs(cfg.x_max));

  std::vector<double> b_grid(J);
  for (std::size_t j = 0; j < J; ++j) b_grid[j] = p.binding.pdf(field.x_at(j));

  std::vector<double> a_iface(J + 1, 0.0);
  if (single_motor) {
    for (std::size_t i = 0; i <= J; ++i)
      a_iface[i] = -p.kappa * (field.x_min + (static_cast<double>(i) - 0.5) * dx);
  }

  // A priori speed bound keeping dt proportional to dx even while v ~ 0,
  // so the explicit source error refines with the grid.
  double v_floor = p.kappa * x_abs + std::abs(p.F);
  if (spec.family == ForceFamily::sine) v_floor = spec.kappa + std::abs(p.F);

  std::vector<double> snaps = cfg.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;

  PdeResult res;
  std::vector<double> scratch(J);
  double next_series = field.t;
  const double t_end = cfg.t_end;

  auto velocity = [&](const DensityField& f) {
    if (single_motor || spec.family == ForceFamily::linear) return velocity_of(f, p);
    return velocity_functional(f, spec, p.F);
  };

  while (true) {
    const double v = velocity(field);
    if (field.t >= next_series - 1e-12) {
      const double w = spec.family == ForceFamily::linear
                           ? 0.0
                           : field.moment_of([&](double x) { return closure_weight(spec, x); });
      res.series.push_back({field.t, field.mass(), v, w});
      check_boundaries(field, single_motor ? 0.0 : v);
      next_series += cfg.series_dt;
    }
    while (next_snap < snaps.size() && field.t >= snaps[next_snap] - 1e-12) {
      res.snapshots.push_back(field);
      ++next_snap;
    }
    if (field.t >= t_end - 1e-12) break;

    double amax = v_floor;
    if (single_motor) {
      amax = p.kappa * x_abs;
    } else {
      std::fill(a_iface.begin(), a_iface.end(), v);
      amax = std::max(std::abs(v), v_floor);
    }

    double dt = cfg.cfl * dx / std::max(amax, 1e-12);
    dt = std::min(dt, 0.5 / (p.c_b + p.c_u));
    dt = std::min(dt, 0.99 / (amax / dx + p.c_u));  // positivity clamp
    double t_stop = std::min(next_series, t_end);
    if (next_snap < snaps.size()) t_stop = std::min(t_stop, snaps[next_snap]);
    dt = std::min(dt, t_stop - field.t);

    const double N = field.mass();
    kernels::upwind_step_parallel(field.n, scratch, a_iface, dt / dx, b_grid,
                                  p.c_b * (1.0 - N) * dt, p.c_u * dt);
    field.n.swap(scratch);
    field.t += dt;
  }
  return res;
}

}  // namespace

PdeResult evolve(DensityField field, const ModelParams& p, const PdeConfig& cfg,
                 const ForceSpec* force) {
  const ForceSpec spec = force ? *force : ForceSpec::linear(p.kappa);
  return run_scheme(std::move(field), p, cfg, spec, false);
}

PdeResult single_motor_evolve(DensityField field, const ModelParams& p, const PdeConfig& cfg) {
  return run_scheme(std::move(field), p, cfg, ForceSpec::linear(p.kappa), true);
}

double stationary_profile_value(const ModelParams& p, double x) {
  const MeanFieldState st = stationary(p);
  const double src = p.c_b * (1.0 - st.N);
  if (st.v == 0.0) return src / p.c_u * p.binding.pdf(x);
  const double speed = std::abs(st.v);
  const double rate = p.c_u / speed;
  auto [lo, hi] = p.binding.essential_support();
  // Truncate where the exponential factor is below ~1e-18.
  const double u_decay = 41.5 / rate;
  // Integrate only over the u-window where b(x +/- u) is supported; a wider
  // interval can hide the density bump from the adaptive subdivision.
  double u_lo, u_hi;
  if (st.v < 0.0) {
    u_lo = std::max(0.0, lo - x);
    u_hi = std::min(hi - x, u_decay);
  } else {
    u_lo = std::max(0.0, x - hi);
    u_hi = std::min(x - lo, u_decay);
  }
  if (u_hi <= u_lo) return 0.0;
  const double sgn = st.v < 0.0 ? 1.0 : -1.0;
  const double integral = adaptive_quadrature(
      [&](double u) { return std::exp(-rate * u) * p.binding.pdf(x + sgn * u); }, u_lo, u_hi,
      1e-14);
  return src / speed * integral;
}

DensityField stationary_profile(const ModelParams& p, const PdeConfig& cfg) {
  validate_params(p);
  check_domain(p, cfg);
  DensityField f = make_field(cfg.x_min, cfg.x_max, cfg.cells);
  for (std::size_t j = 0; j < f.n.size(); ++j)
    f.n[j] = stationary_profile_value(p, f.x_at(j));
  return f;
}

}  // namespace motorsim
