#include "motorsim/meanfield_ode.hpp"

#include <cmath>

#include "motorsim/rk45.hpp"

namespace motorsim {

MeanFieldDerivs rhs(const MeanFieldState& s, const ModelParams& p) {
  const double m1 = p.binding.first_moment();
  const double dN = p.c_b * (1.0 - s.N) - p.c_u * s.N;
  const double dv = -p.kappa * (s.v * s.N + p.c_b * (1.0 - s.N) * m1) + p.c_u * (p.F - s.v);
  return {dN, dv};
}

std::vector<MeanFieldState> integrate(const ModelParams& p, MeanFieldState init,
                                      std::span<const double> t_grid) {
  auto f = [&p](double, const std::array<double, 2>& y) {
    const MeanFieldDerivs d = rhs({y[0], y[1]}, p);
    return std::array<double, 2>{d.dN, d.dv};
  };
  auto states = rk45_integrate<2>(f, {init.N, init.v}, t_grid);
  std::vector<MeanFieldState> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back({s[0], s[1]});
  return out;
}

MeanFieldState stationary(const ModelParams& p) {
  if (p.c_u == 0.0)
    throw Error(ErrorCode::DegenerateRate, "stationary velocity undefined at c_u = 0");
  const double m1 = p.binding.first_moment();
  const double N = p.c_b / (p.c_b + p.c_u);
  const double v = -(p.kappa * p.c_b * m1 - p.F * (p.c_b + p.c_u)) /
                   (p.c_b + p.c_u + p.kappa * p.c_b / p.c_u);
  return {N, v};
}

namespace {

double stationary_v(const ModelParams& p, double c_u) {
  ModelParams q = p;
  q.c_u = c_u;
  return stationary(q).v;
}

// Golden-section minimizer of f on [a, b].
template <typename F>
double golden_min(F&& f, double a, double b, double rel_tol = 1e-12, int max_iter = 300) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > rel_tol * (std::abs(a) + std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

OptimalRate optimal_unbind_rate(const ModelParams& p) {
  const double m1 = p.binding.first_moment();
  if (p.F >= p.kappa * m1)
    throw Error(ErrorCode::RegimeError, "optimal unbinding rate requires F < kappa * m1");
  const double c_u_opt =
      std::sqrt(p.F * p.F / (m1 * m1) + p.c_b * (p.kappa * m1 - p.F) / m1) - p.F / m1;
  const double v_opt = std::abs(stationary_v(p, c_u_opt));

  // Cross-check: the stationary velocity is most negative at c_u_opt.
  const double c_u_num =
      golden_min([&](double c) { return stationary_v(p, c); }, 1e-9 * c_u_opt, 10.0 * c_u_opt);
  if (std::abs(c_u_num - c_u_opt) > 1e-6 * c_u_opt)
    throw Error(ErrorCode::RegimeError,
                "closed-form optimal unbinding rate disagrees with numeric optimizer");
  return {c_u_opt, v_opt};
}

double zero_velocity_threshold(const ModelParams& p) {
  const double m1 = p.binding.first_moment();
  if (!(p.F > 0.0 && p.F < p.kappa * m1))
    throw Error(ErrorCode::RegimeError, "zero-velocity threshold requires 0 < F < kappa * m1");
  return p.c_b * (p.kappa * m1 - p.F) / p.F;
}

double extremal_speed_formula(const ModelParams& p) {
  const double m1 = p.binding.first_moment();
  return std::sqrt(p.c_b) * m1 / (2.0 * std::sqrt(p.kappa) + std::sqrt(p.c_b));
}

RegimeReport classify_regime(const ModelParams& p) {
  const double m1 = p.binding.first_moment();
  RegimeReport r{};
  if (p.F >= p.kappa * m1) {
    r.regime = Regime::strong_force;
    // Sanity: the stationary velocity is positive for all c_u in this regime.
    for (double lg = -3.0; lg <= 3.0; lg += 0.5) {
      if (stationary_v(p, std::pow(10.0, lg)) < 0.0)
        throw Error(ErrorCode::RegimeError, "strong-force regime with negative velocity sample");
    }
    return r;
  }
  r.regime = p.F > 0.0 ? Regime::weak_force : Regime::no_force;
  const OptimalRate opt = optimal_unbind_rate(p);
  r.c_u_opt = opt.c_u_opt;
  r.v_opt = opt.v_opt;
  if (r.regime == Regime::weak_force) r.c_u_zero = zero_velocity_threshold(p);
  return r;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::no_force: return "no_force";
    case Regime::weak_force: return "weak_force";
    case Regime::strong_force: return "strong_force";
  }
  return "?";
}

}  // namespace motorsim
