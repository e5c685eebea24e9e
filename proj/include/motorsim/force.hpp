#pragma once

#include <cmath>

namespace motorsim {

enum class ForceFamily { linear, sine, sinh_family };

/// Returning-force kernel phi(x); the filament velocity is
/// v = ∫ phi(x) n(x) dx + F.
struct ForceSpec {
  ForceFamily family = ForceFamily::linear;
  double kappa = 1.0;
  double alpha = 1.0;  // unused for the linear family

  static ForceSpec linear(double kappa) { return {ForceFamily::linear, kappa, 0.0}; }
  static ForceSpec sine(double kappa, double alpha) {
    return {ForceFamily::sine, kappa, alpha};
  }
  static ForceSpec sinh(double kappa, double alpha) {
    return {ForceFamily::sinh_family, kappa, alpha};
  }

  double phi(double x) const {
    switch (family) {
      case ForceFamily::linear: return -kappa * x;
      case ForceFamily::sine: return -kappa * std::sin(alpha * x);
      case ForceFamily::sinh_family: return -kappa * std::sinh(alpha * x);
    }
    return 0.0;
  }
};

}  // namespace motorsim
