#pragma once

#include <span>
#include <vector>

#include "motorsim/force.hpp"
#include "motorsim/model.hpp"

namespace motorsim {

/// Grid representation of the first correlation function n(x, t):
/// J + 1 uniformly spaced nodes treated as centers of cells of width dx.
struct DensityField {
  double x_min = 0.0;
  double dx = 0.0;
  std::vector<double> n;
  double t = 0.0;

  double x_at(std::size_t j) const { return x_min + static_cast<double>(j) * dx; }
  double x_max() const { return x_at(n.size() - 1); }

  double mass() const;          // trapezoid rule
  double first_moment() const;  // trapezoid rule of x n

  template <typename F>
  double moment_of(F&& weight) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) {
      const double w = (j == 0 || j + 1 == n.size()) ? 0.5 : 1.0;
      s += w * weight(x_at(j)) * n[j];
    }
    return s * dx;
  }
};

DensityField make_field(double x_min, double x_max, int cells);

struct PdeConfig {
  double x_min = -6.0;
  double x_max = 8.0;
  int cells = 2000;      // J; the grid has J + 1 nodes
  double cfl = 0.5;
  double t_end = 10.0;
  double series_dt = 0.01;
  std::vector<double> snapshot_times;
};

/// Domain sizing: binding-density support padded by the drift headroom.
PdeConfig default_grid(const ModelParams& p, int cells, double t_end);

/// v = -kappa ∫ x n dx + F (linear returning force).
double velocity_of(const DensityField& field, const ModelParams& p);

struct SeriesRow {
  double t, N, v, w;  // w: closure moment for sine/sinh forces, 0 otherwise
};

struct PdeResult {
  std::vector<SeriesRow> series;
  std::vector<DensityField> snapshots;
};

/// Transport equation  n_t + v n_x = c_b b(x)(1 - N) - c_u n  with the
/// self-consistent velocity recomputed every step. First-order upwind in
/// conservative flux form, explicit sources, inflow value 0.
/// `force` selects the velocity functional; nullptr means linear(kappa).
PdeResult evolve(DensityField field, const ModelParams& p, const PdeConfig& cfg,
                 const ForceSpec* force = nullptr);

/// Closed-form stationary profile of the transport equation, evaluated on the
/// grid by quadrature (integrating-factor solution; pointwise balance when the
/// stationary velocity vanishes exactly).
DensityField stationary_profile(const ModelParams& p, const PdeConfig& cfg);

/// Pointwise evaluation of the stationary profile (continuous in x).
double stationary_profile_value(const ModelParams& p, double x);

/// Single-motor density equation p_t = c_b b(x) P(t) + kappa (x p)_x - c_u p,
/// P = 1 - ∫ p: same scheme with the space-dependent drift -kappa x.
PdeResult single_motor_evolve(DensityField field, const ModelParams& p, const PdeConfig& cfg);

namespace kernels {

/// One upwind + explicit-source step. a_iface holds the advection velocity at
/// the n.size() + 1 cell interfaces; exterior upwind values are 0.
/// out_j = n_j - dt/dx (F_{j+1/2} - F_{j-1/2}) + bind_dt b_j - decay_dt n_j.
void upwind_step_serial(std::span<const double> n, std::span<double> out,
                        std::span<const double> a_iface, double dt_over_dx,
                        std::span<const double> b, double bind_dt, double decay_dt);

/// OpenMP variant; bit-identical to the serial kernel.
void upwind_step_parallel(std::span<const double> n, std::span<double> out,
                          std::span<const double> a_iface, double dt_over_dx,
                          std::span<const double> b, double bind_dt, double decay_dt);

}  // namespace kernels

}  // namespace motorsim
