#include "motorsim/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>

#include "motorsim/meanfield_ode.hpp"
#include "motorsim/rk45.hpp"

namespace motorsim {

double velocity_functional(const DensityField& field, const ForceSpec& spec, double F) {
  if (spec.family == ForceFamily::sinh_family) {
    const double extent = std::max(std::abs(field.x_min), std::abs(field.x_max()));
    if (spec.alpha * extent > 700.0)
      throw Error(ErrorCode::OverflowRisk, "sinh(alpha x) overflows on this grid");
  }
  return field.moment_of([&](double x) { return spec.phi(x); }) + F;
}

ClosureMoments closure_moments(const BindingDensity& b, const ForceSpec& spec) {
  switch (spec.family) {
    case ForceFamily::sine:
      return {b.sin_moment(spec.alpha), b.cos_moment(spec.alpha), +1.0};
    case ForceFamily::sinh_family:
      return {b.sinh_moment(spec.alpha), b.cosh_moment(spec.alpha), -1.0};
    case ForceFamily::linear:
      break;
  }
  throw Error(ErrorCode::ConfigError, "closure moments need a sine or sinh force");
}

namespace {

ClosureDerivs closure_rhs(const ClosureState& s, const ModelParams& p, double alpha,
                          const ClosureMoments& m) {
  const double unbound_src = p.c_b * (1.0 - s.N);
  return {
      unbound_src - p.c_u * s.N,
      -p.kappa * alpha * s.v * s.w - p.kappa * unbound_src * m.ms + p.c_u * (p.F - s.v),
      m.sign * alpha * s.v * (s.v - p.F) / p.kappa + unbound_src * m.mc - p.c_u * s.w,
  };
}

}  // namespace

ClosureDerivs sine_rhs(const ClosureState& s, const ModelParams& p, double alpha,
                       const ClosureMoments& m) {
  return closure_rhs(s, p, alpha, {m.ms, m.mc, +1.0});
}

ClosureDerivs sinh_rhs(const ClosureState& s, const ModelParams& p, double alpha,
                       const ClosureMoments& m) {
  return closure_rhs(s, p, alpha, {m.ms, m.mc, -1.0});
}

std::array<std::array<double, 3>, 3> closure_jacobian(const ClosureState& s,
                                                      const ModelParams& p, double alpha,
                                                      const ClosureMoments& m) {
  return {{
      {-(p.c_b + p.c_u), 0.0, 0.0},
      {p.kappa * p.c_b * m.ms, -p.kappa * alpha * s.w - p.c_u, -p.kappa * alpha * s.v},
      {-p.c_b * m.mc, m.sign * alpha * (2.0 * s.v - p.F) / p.kappa, -p.c_u},
  }};
}

std::vector<ClosureState> closure_integrate(const ModelParams& p, const ForceSpec& spec,
                                            ClosureState init, std::span<const double> t_grid) {
  const ClosureMoments m = closure_moments(p.binding, spec);
  const double alpha = spec.alpha;
  ModelParams q = p;
  q.kappa = spec.kappa;
  auto f = [&](double, const std::array<double, 3>& y) {
    const ClosureDerivs d = closure_rhs({y[0], y[1], y[2]}, q, alpha, m);
    return std::array<double, 3>{d.dN, d.dv, d.dw};
  };
  auto states = rk45_integrate<3>(f, {init.N, init.v, init.w}, t_grid);
  std::vector<ClosureState> out;
  out.reserve(states.size());
  for (const auto& y : states) out.push_back({y[0], y[1], y[2]});
  return out;
}

const char* stability_name(Stability s) {
  switch (s) {
    case Stability::stable_node: return "stable_node";
    case Stability::stable_focus: return "stable_focus";
    case Stability::saddle: return "saddle";
    case Stability::unstable: return "unstable";
  }
  return "?";
}

SearchBox default_search_box(const ModelParams& p, const ForceSpec& spec) {
  const double Nbar = p.c_b / (p.c_b + p.c_u);
  return {p.F - 2.0 * spec.kappa, p.F + 2.0 * spec.kappa, -2.0 * Nbar, 2.0 * Nbar};
}

namespace {

Stability classify(const ClosureState& s, const ModelParams& p, double alpha,
                   const ClosureMoments& m) {
  // The N row is decoupled with eigenvalue -(c_b + c_u) < 0; stability is
  // decided by the lower-right 2x2 block in (v, w).
  const auto jac = closure_jacobian(s, p, alpha, m);
  const double a = jac[1][1], b = jac[1][2], c = jac[2][1], d = jac[2][2];
  const double tr = a + d, det = a * d - b * c;
  if (det < 0.0) return Stability::saddle;
  const double disc = tr * tr - 4.0 * det;
  if (tr < 0.0) return disc >= 0.0 ? Stability::stable_node : Stability::stable_focus;
  return Stability::unstable;
}

struct NewtonResult {
  double v, w, residual;
};

std::optional<NewtonResult> newton_2d(const ModelParams& p, double alpha,
                                      const ClosureMoments& m, double Nbar, double v,
                                      double w) {
  auto G = [&](double vv, double ww) {
    const ClosureDerivs d = closure_rhs({Nbar, vv, ww}, p, alpha, m);
    return std::array<double, 2>{d.dv, d.dw};
  };
  auto norm = [](const std::array<double, 2>& g) {
    return std::sqrt(g[0] * g[0] + g[1] * g[1]);
  };
  std::array<double, 2> g = G(v, w);
  for (int it = 0; it < 200; ++it) {
    if (norm(g) < 1e-13) break;
    const double jvv = -p.kappa * alpha * w - p.c_u;
    const double jvw = -p.kappa * alpha * v;
    const double jwv = m.sign * alpha * (2.0 * v - p.F) / p.kappa;
    const double jww = -p.c_u;
    const double det = jvv * jww - jvw * jwv;
    if (std::abs(det) < 1e-300) return std::nullopt;
    const double dv = (-g[0] * jww + g[1] * jvw) / det;
    const double dw = (-g[1] * jvv + g[0] * jwv) / det;
    // Damped step: halve until the residual decreases.
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h < 50; ++h) {
      const auto g_try = G(v + step * dv, w + step * dw);
      if (norm(g_try) < norm(g)) {
        v += step * dv;
        w += step * dw;
        g = g_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return std::nullopt;
  }
  const double r = norm(G(v, w));
  if (r > 1e-10 || !std::isfinite(v) || !std::isfinite(w)) return std::nullopt;
  return NewtonResult{v, w, r};
}

}  // namespace

std::vector<StationaryPoint> find_stationary_points(const ModelParams& p, const ForceSpec& spec,
                                                    SearchBox box, int n_starts) {
  validate_params(p);
  if (p.c_u <= 0.0)
    throw Error(ErrorCode::DegenerateRate, "stationary points require c_u > 0");
  const ClosureMoments m = closure_moments(p.binding, spec);
  ModelParams q = p;
  q.kappa = spec.kappa;
  const double Nbar = p.c_b / (p.c_b + p.c_u);

  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<std::optional<NewtonResult>> hits(n_starts * n_starts);
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < n_starts * n_starts; ++idx) {
      const int i = idx / n_starts, j = idx % n_starts;
      const double v0 = box.v_lo + (box.v_hi - box.v_lo) * (i + 0.5) / n_starts;
      const double w0 = box.w_lo + (box.w_hi - box.w_lo) * (j + 0.5) / n_starts;
      hits[idx] = newton_2d(q, spec.alpha, m, Nbar, v0, w0);
    }

    std::vector<StationaryPoint> roots;
    for (const auto& h : hits) {
      if (!h) continue;
      bool dup = false;
      for (const auto& r : roots)
        if (std::abs(r.v - h->v) + std::abs(r.w - h->w) < 1e-8) {
          dup = true;
          break;
        }
      if (dup) continue;
      roots.push_back({Nbar, h->v, h->w, h->residual,
                       classify({Nbar, h->v, h->w}, q, spec.alpha, m)});
    }
    std::sort(roots.begin(), roots.end(),
              [](const StationaryPoint& a, const StationaryPoint& b) { return a.v < b.v; });

    const double v_edge = 0.01 * (box.v_hi - box.v_lo), w_edge = 0.01 * (box.w_hi - box.w_lo);
    bool on_edge = false;
    for (const auto& r : roots)
      if (std::abs(r.v - box.v_lo) < v_edge || std::abs(r.v - box.v_hi) < v_edge ||
          std::abs(r.w - box.w_lo) < w_edge || std::abs(r.w - box.w_hi) < w_edge)
        on_edge = true;
    if (!on_edge || attempt == 1) return roots;

    const double vc = 0.5 * (box.v_lo + box.v_hi), wc = 0.5 * (box.w_lo + box.w_hi);
    const double vh = box.v_hi - vc, wh = box.w_hi - wc;
    box = {vc - 2.0 * vh, vc + 2.0 * vh, wc - 2.0 * wh, wc + 2.0 * wh};
  }
  return {};
}

CycleReport detect_limit_cycle(const ModelParams& p, const ForceSpec& spec, ClosureState init,
                               double t_max) {
  validate_params(p);
  const auto points = find_stationary_points(p, spec, default_search_box(p, spec));

  const int n_samples = 40000;
  std::vector<double> t_grid(n_samples + 1);
  for (int i = 0; i <= n_samples; ++i) t_grid[i] = t_max * i / n_samples;
  const auto traj = closure_integrate(p, spec, init, t_grid);

  CycleReport rep;
  rep.final_state = traj.back();

  auto near_point = [&](const ClosureState& s) {
    for (const auto& q : points) {
      const double d = std::abs(s.N - q.N) + std::abs(s.v - q.v) + std::abs(s.w - q.w);
      if (d < 1e-8) return true;
    }
    return false;
  };
  if (near_point(rep.final_state)) {
    rep.kind = CycleReport::Kind::converged;
    return rep;
  }

  // Look for stable oscillations via local maxima of v in the second half.
  const std::size_t half = traj.size() / 2;
  std::vector<double> peak_t, peak_v;
  double v_min = traj[half].v, v_max = traj[half].v;
  for (std::size_t i = half + 1; i + 1 < traj.size(); ++i) {
    v_min = std::min(v_min, traj[i].v);
    v_max = std::max(v_max, traj[i].v);
    if (traj[i].v > traj[i - 1].v && traj[i].v >= traj[i + 1].v) {
      // Parabolic refinement of the peak location.
      const double y0 = traj[i - 1].v, y1 = traj[i].v, y2 = traj[i + 1].v;
      const double denom = y0 - 2.0 * y1 + y2;
      const double off = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
      peak_t.push_back(t_grid[i] + off * (t_grid[1] - t_grid[0]));
      peak_v.push_back(y1);
    }
  }

  if (peak_t.size() >= 6) {
    std::vector<double> periods;
    for (std::size_t i = peak_t.size() - 5; i < peak_t.size(); ++i)
      periods.push_back(peak_t[i] - peak_t[i - 1]);
    const double p0 = periods.front();
    bool stable = p0 > 0.0;
    for (double per : periods) stable = stable && std::abs(per - p0) <= 1e-4 * p0;
    const double a0 = peak_v[peak_v.size() - 5] - v_min;
    for (std::size_t i = peak_v.size() - 5; i < peak_v.size(); ++i)
      stable = stable && std::abs((peak_v[i] - v_min) - a0) <= 1e-4 * std::abs(a0);
    if (stable && v_max - v_min > 1e-6) {
      rep.kind = CycleReport::Kind::cycle;
      rep.period = p0;
      rep.amplitude = v_max - v_min;
      return rep;
    }
  }
  rep.kind = CycleReport::Kind::inconclusive;
  return rep;
}

}  // namespace motorsim
