#pragma once

#include <random>
#include <utility>

#include "motorsim/errors.hpp"

namespace motorsim {

enum class DensityFamily { gaussian, uniform, shifted_exponential };

/// Displacement distribution at the moment of binding. Three parametric
/// families are supported; each has closed-form trigonometric and hyperbolic
/// moments, which the rest of the toolkit consumes.
struct BindingDensity {
  DensityFamily family = DensityFamily::gaussian;
  double p1 = 1.0;  // gaussian: mu, uniform: a, shifted_exponential: x0
  double p2 = 0.5;  // gaussian: sigma, uniform: b_hi, shifted_exponential: lambda

  static BindingDensity gaussian(double mu, double sigma) {
    return {DensityFamily::gaussian, mu, sigma};
  }
  static BindingDensity uniform(double a, double b_hi) {
    return {DensityFamily::uniform, a, b_hi};
  }
  static BindingDensity shifted_exponential(double x0, double lambda) {
    return {DensityFamily::shifted_exponential, x0, lambda};
  }

  double pdf(double x) const;
  double sample(std::mt19937_64& rng) const;

  /// Interval outside which the density mass is < ~1e-14 (exact for uniform).
  std::pair<double, double> essential_support() const;

  /// Degenerate gaussian with sigma == 0 (delta at mu).
  bool is_point_mass() const;

  double first_moment() const;
  double cos_moment(double alpha) const;
  double sin_moment(double alpha) const;
  double cosh_moment(double alpha) const;  // throws DivergentMoment if infinite
  double sinh_moment(double alpha) const;
};

struct DensityMoments {
  double m1;  // ∫ x b(x) dx
  double mc;  // ∫ cos(αx) b(x) dx
  double ms;  // ∫ sin(αx) b(x) dx
};

struct ModelParams {
  double c_b = 1.0;   // binding rate
  double c_u = 1.0;   // unbinding rate
  double kappa = 1.0; // single-motor tension coefficient
  double F = 0.0;     // external-force velocity contribution
  BindingDensity binding;
};

/// Returns p unchanged if all model invariants hold, throws otherwise.
ModelParams validate_params(const ModelParams& p);

DensityMoments moments(const BindingDensity& b, double alpha);

/// Quadrature of the density over its essential support (normalization check).
double density_mass_quadrature(const BindingDensity& b, double abs_tol = 1e-11);

}  // namespace motorsim
