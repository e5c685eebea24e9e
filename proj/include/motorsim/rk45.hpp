#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "motorsim/errors.hpp"

namespace motorsim {

/// Adaptive Dormand-Prince 5(4) integration of y' = rhs(t, y).
/// Returns the solution at every point of t_grid (t_grid increasing;
/// the first entry is the initial time).
template <std::size_t K, typename Rhs>
std::vector<std::array<double, K>> rk45_integrate(Rhs&& rhs, std::array<double, K> y,
                                                  std::span<const double> t_grid,
                                                  double rel_tol = 1e-9,
                                                  double abs_tol = 1e-12) {
  using Vec = std::array<double, K>;
  // Dormand-Prince tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // 5th-minus-4th order error weights.
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<Vec> out;
  out.reserve(t_grid.size());
  if (t_grid.empty()) return out;
  out.push_back(y);

  double t = t_grid[0];
  Vec k1 = rhs(t, y);
  double h = 1e-4;

  auto axpy = [](Vec& r, const Vec& y0, double hh, const auto&... terms) {
    for (std::size_t i = 0; i < K; ++i) {
      double s = 0.0;
      ((s += terms.first * terms.second[i]), ...);
      r[i] = y0[i] + hh * s;
    }
  };

  for (std::size_t gi = 1; gi < t_grid.size(); ++gi) {
    const double t_target = t_grid[gi];
    while (t < t_target) {
      h = std::min(h, t_target - t);
      if (h < 1e-14 * std::max(1.0, std::abs(t)))
        throw Error(ErrorCode::StepFailure, "rk45: step size underflow");
      Vec y2, y3, y4, y5, y6, ynew;
      axpy(y2, y, h, std::pair{a21, k1});
      Vec k2 = rhs(t + c2 * h, y2);
      axpy(y3, y, h, std::pair{a31, k1}, std::pair{a32, k2});
      Vec k3 = rhs(t + c3 * h, y3);
      axpy(y4, y, h, std::pair{a41, k1}, std::pair{a42, k2}, std::pair{a43, k3});
      Vec k4 = rhs(t + c4 * h, y4);
      axpy(y5, y, h, std::pair{a51, k1}, std::pair{a52, k2}, std::pair{a53, k3},
           std::pair{a54, k4});
      Vec k5 = rhs(t + c5 * h, y5);
      axpy(y6, y, h, std::pair{a61, k1}, std::pair{a62, k2}, std::pair{a63, k3},
           std::pair{a64, k4}, std::pair{a65, k5});
      Vec k6 = rhs(t + h, y6);
      axpy(ynew, y, h, std::pair{b1, k1}, std::pair{b3, k3}, std::pair{b4, k4},
           std::pair{b5, k5}, std::pair{b6, k6});
      Vec k7 = rhs(t + h, ynew);

      double err = 0.0;
      for (std::size_t i = 0; i < K; ++i) {
        const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                               e7 * k7[i]);
        const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err += (ei / sc) * (ei / sc);
      }
      err = std::sqrt(err / K);

      if (err <= 1.0) {
        t += h;
        y = ynew;
        k1 = k7;  // FSAL
      }
      const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
      h *= fac;
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace motorsim
