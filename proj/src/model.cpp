#include "motorsim/model.hpp"

#include <cmath>
#include <limits>

#include "motorsim/quadrature.hpp"

namespace motorsim {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}

bool BindingDensity::is_point_mass() const {
  return family == DensityFamily::gaussian && p2 == 0.0;
}

double BindingDensity::pdf(double x) const {
  switch (family) {
    case DensityFamily::gaussian: {
      const double mu = p1, sigma = p2;
      if (sigma == 0.0) return x == mu ? std::numeric_limits<double>::infinity() : 0.0;
      const double z = (x - mu) / sigma;
      return kInvSqrt2Pi / sigma * std::exp(-0.5 * z * z);
    }
    case DensityFamily::uniform: {
      const double a = p1, b = p2;
      return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
    }
    case DensityFamily::shifted_exponential: {
      const double x0 = p1, lambda = p2;
      return x >= x0 ? lambda * std::exp(-lambda * (x - x0)) : 0.0;
    }
  }
  return 0.0;
}

double BindingDensity::sample(std::mt19937_64& rng) const {
  switch (family) {
    case DensityFamily::gaussian: {
      if (p2 == 0.0) return p1;
      std::normal_distribution<double> d(p1, p2);
      return d(rng);
    }
    case DensityFamily::uniform: {
      std::uniform_real_distribution<double> d(p1, p2);
      return d(rng);
    }
    case DensityFamily::shifted_exponential: {
      std::exponential_distribution<double> d(p2);
      return p1 + d(rng);
    }
  }
  return 0.0;
}

std::pair<double, double> BindingDensity::essential_support() const {
  switch (family) {
    case DensityFamily::gaussian:
      return {p1 - 8.0 * p2, p1 + 8.0 * p2};
    case DensityFamily::uniform:
      return {p1, p2};
    case DensityFamily::shifted_exponential:
      return {p1, p1 + 40.0 / p2};
  }
  return {0.0, 0.0};
}

double BindingDensity::first_moment() const {
  switch (family) {
    case DensityFamily::gaussian:
      return p1;
    case DensityFamily::uniform:
      return 0.5 * (p1 + p2);
    case DensityFamily::shifted_exponential:
      return p1 + 1.0 / p2;
  }
  return 0.0;
}

double BindingDensity::cos_moment(double alpha) const {
  switch (family) {
    case DensityFamily::gaussian:
      return std::exp(-0.5 * alpha * alpha * p2 * p2) * std::cos(alpha * p1);
    case DensityFamily::uniform: {
      if (alpha == 0.0) return 1.0;
      return (std::sin(alpha * p2) - std::sin(alpha * p1)) / (alpha * (p2 - p1));
    }
    case DensityFamily::shifted_exponential: {
      const double x0 = p1, l = p2, d = l * l + alpha * alpha;
      return l * (l * std::cos(alpha * x0) - alpha * std::sin(alpha * x0)) / d;
    }
  }
  return 0.0;
}

double BindingDensity::sin_moment(double alpha) const {
  switch (family) {
    case DensityFamily::gaussian:
      return std::exp(-0.5 * alpha * alpha * p2 * p2) * std::sin(alpha * p1);
    case DensityFamily::uniform: {
      if (alpha == 0.0) return 0.0;
      return (std::cos(alpha * p1) - std::cos(alpha * p2)) / (alpha * (p2 - p1));
    }
    case DensityFamily::shifted_exponential: {
      const double x0 = p1, l = p2, d = l * l + alpha * alpha;
      return l * (l * std::sin(alpha * x0) + alpha * std::cos(alpha * x0)) / d;
    }
  }
  return 0.0;
}

double BindingDensity::cosh_moment(double alpha) const {
  switch (family) {
    case DensityFamily::gaussian:
      return std::exp(0.5 * alpha * alpha * p2 * p2) * std::cosh(alpha * p1);
    case DensityFamily::uniform: {
      if (alpha == 0.0) return 1.0;
      return (std::sinh(alpha * p2) - std::sinh(alpha * p1)) / (alpha * (p2 - p1));
    }
    case DensityFamily::shifted_exponential: {
      const double x0 = p1, l = p2, a = std::abs(alpha);
      if (a >= l)
        throw Error(ErrorCode::DivergentMoment,
                    "cosh moment diverges for shifted_exponential with alpha >= lambda");
      const double ep = l * std::exp(alpha * x0) / (l - alpha);
      const double em = l * std::exp(-alpha * x0) / (l + alpha);
      return 0.5 * (ep + em);
    }
  }
  return 0.0;
}

double BindingDensity::sinh_moment(double alpha) const {
  switch (family) {
    case DensityFamily::gaussian:
      return std::exp(0.5 * alpha * alpha * p2 * p2) * std::sinh(alpha * p1);
    case DensityFamily::uniform: {
      if (alpha == 0.0) return 0.0;
      return (std::cosh(alpha * p2) - std::cosh(alpha * p1)) / (alpha * (p2 - p1));
    }
    case DensityFamily::shifted_exponential: {
      const double x0 = p1, l = p2, a = std::abs(alpha);
      if (a >= l)
        throw Error(ErrorCode::DivergentMoment,
                    "sinh moment diverges for shifted_exponential with alpha >= lambda");
      const double ep = l * std::exp(alpha * x0) / (l - alpha);
      const double em = l * std::exp(-alpha * x0) / (l + alpha);
      return 0.5 * (ep - em);
    }
  }
  return 0.0;
}

double density_mass_quadrature(const BindingDensity& b, double abs_tol) {
  if (b.is_point_mass()) return 1.0;
  auto [lo, hi] = b.essential_support();
  return adaptive_quadrature([&](double x) { return b.pdf(x); }, lo, hi, abs_tol);
}

ModelParams validate_params(const ModelParams& p) {
  if (p.c_b <= 0.0) throw Error(ErrorCode::NonPositiveRate, "c_b must be > 0");
  if (p.kappa <= 0.0) throw Error(ErrorCode::NonPositiveRate, "kappa must be > 0");
  if (p.c_u < 0.0) throw Error(ErrorCode::NegativeRate, "c_u must be >= 0");
  const BindingDensity& b = p.binding;
  switch (b.family) {
    case DensityFamily::gaussian:
      if (b.p2 < 0.0) throw Error(ErrorCode::UnnormalizedDensity, "gaussian sigma must be >= 0");
      break;
    case DensityFamily::uniform:
      if (!(b.p1 < b.p2))
        throw Error(ErrorCode::UnnormalizedDensity, "uniform requires a < b_hi");
      break;
    case DensityFamily::shifted_exponential:
      if (b.p2 <= 0.0)
        throw Error(ErrorCode::UnnormalizedDensity, "shifted_exponential lambda must be > 0");
      break;
  }
  if (std::abs(density_mass_quadrature(b) - 1.0) > 1e-10)
    throw Error(ErrorCode::UnnormalizedDensity, "binding density does not integrate to 1");
  if (b.first_moment() <= 0.0)
    throw Error(ErrorCode::NonPositiveFirstMoment, "binding density first moment must be > 0");
  return p;
}

DensityMoments moments(const BindingDensity& b, double alpha) {
  return {b.first_moment(), b.cos_moment(alpha), b.sin_moment(alpha)};
}

}  // namespace motorsim
