#pragma once

#include <optional>
#include <span>
#include <vector>

#include "motorsim/model.hpp"

namespace motorsim {

struct MeanFieldState {
  double N = 0.0;  // bound fraction
  double v = 0.0;  // filament velocity
};

struct MeanFieldDerivs {
  double dN, dv;
};

/// Right-hand side of the closed (N, v) moment system:
///   N' = c_b (1 - N) - c_u N
///   v' = -kappa (v N + c_b (1 - N) m1) + c_u (F - v)
MeanFieldDerivs rhs(const MeanFieldState& s, const ModelParams& p);

std::vector<MeanFieldState> integrate(const ModelParams& p, MeanFieldState init,
                                      std::span<const double> t_grid);

/// Closed-form stationary values; throws DegenerateRate when c_u == 0
/// (the limit is N = 1, v = 0).
MeanFieldState stationary(const ModelParams& p);

struct OptimalRate {
  double c_u_opt;  // unbinding rate maximizing |v| (v negative there)
  double v_opt;    // |v(c_u_opt)| from the stationary closed form
};

/// Closed-form extremal unbinding rate, cross-checked against a
/// golden-section optimization of the stationary velocity.
/// Requires F < kappa * m1.
OptimalRate optimal_unbind_rate(const ModelParams& p);

/// Unbinding rate at which the stationary velocity crosses zero.
/// Requires 0 < F < kappa * m1.
double zero_velocity_threshold(const ModelParams& p);

/// The F = 0 speed formula sqrt(c_b) m1 / (2 sqrt(kappa) + sqrt(c_b)).
/// Disagrees with |v(c_u_opt)| by a factor kappa when kappa != 1; reported
/// side by side by the validate command rather than asserted equal.
double extremal_speed_formula(const ModelParams& p);

enum class Regime { no_force, weak_force, strong_force };

struct RegimeReport {
  Regime regime;
  std::optional<double> c_u_opt;
  std::optional<double> v_opt;
  std::optional<double> c_u_zero;
};

RegimeReport classify_regime(const ModelParams& p);

const char* regime_name(Regime r);

}  // namespace motorsim
