#pragma once

#include <array>
#include <span>
#include <vector>

#include "motorsim/force.hpp"
#include "motorsim/meanfield_pde.hpp"
#include "motorsim/model.hpp"

namespace motorsim {

/// v = ∫ phi(x) n(x) dx + F evaluated by the field's trapezoid rule.
double velocity_functional(const DensityField& field, const ForceSpec& spec, double F);

struct ClosureState {
  double N = 0.0;  // bound fraction
  double v = 0.0;  // filament velocity
  double w = 0.0;  // ∫ cos(αx) n dx (sine) or ∫ cosh(αx) n dx (sinh)
};

struct ClosureDerivs {
  double dN, dv, dw;
};

/// Binding-density moments entering the closed (N, v, w) system.
struct ClosureMoments {
  double ms;   // ∫ sin(αx) b dx, or ∫ sinh(αx) b dx for the sinh family
  double mc;   // ∫ cos(αx) b dx, or ∫ cosh(αx) b dx
  double sign; // +1 sine, -1 sinh: sign of the α v (v - F) / kappa term in w'
};

ClosureMoments closure_moments(const BindingDensity& b, const ForceSpec& spec);

/// Closed system for phi(x) = -kappa sin(αx):
///   N' = c_b (1 - N) - c_u N
///   v' = -kappa α v w - kappa c_b (1 - N) m_s + c_u (F - v)
///   w' =  α v (v - F) / kappa + c_b (1 - N) m_c - c_u w
ClosureDerivs sine_rhs(const ClosureState& s, const ModelParams& p, double alpha,
                       const ClosureMoments& m);

/// Same system for phi(x) = -kappa sinh(αx): the α v (v - F) / kappa term in
/// w' flips sign and the moments are hyperbolic.
ClosureDerivs sinh_rhs(const ClosureState& s, const ModelParams& p, double alpha,
                       const ClosureMoments& m);

/// Analytic Jacobian of the closure system at s (rows d(N',v',w')/d(N,v,w)).
std::array<std::array<double, 3>, 3> closure_jacobian(const ClosureState& s,
                                                      const ModelParams& p, double alpha,
                                                      const ClosureMoments& m);

std::vector<ClosureState> closure_integrate(const ModelParams& p, const ForceSpec& spec,
                                            ClosureState init, std::span<const double> t_grid);

enum class Stability { stable_node, stable_focus, saddle, unstable };

const char* stability_name(Stability s);

struct StationaryPoint {
  double N, v, w;
  double residual;
  Stability stability;
};

struct SearchBox {
  double v_lo, v_hi, w_lo, w_hi;
};

/// Default (v, w) box: |∫ sin(αx) n| <= N <= 1 and |w| <= N for the sine
/// family, with drift headroom in v.
SearchBox default_search_box(const ModelParams& p, const ForceSpec& spec);

/// Damped-Newton sweep over an n_starts x n_starts grid with N pinned to its
/// stationary value; deduplicated roots sorted by v. The box is widened once
/// (x2) if a root lands on its edge.
std::vector<StationaryPoint> find_stationary_points(const ModelParams& p, const ForceSpec& spec,
                                                    SearchBox box, int n_starts = 12);

struct CycleReport {
  enum class Kind { converged, cycle, inconclusive } kind;
  double period = 0.0;
  double amplitude = 0.0;  // peak-to-trough of v over one period
  ClosureState final_state;
};

/// Integrates to t_max; the first half is discarded. Reports convergence to a
/// stationary point, a limit cycle (period/amplitude stable over >= 5
/// consecutive v-maxima), or inconclusive.
CycleReport detect_limit_cycle(const ModelParams& p, const ForceSpec& spec, ClosureState init,
                               double t_max);

}  // namespace motorsim
