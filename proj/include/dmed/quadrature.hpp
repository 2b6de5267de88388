#pragma once

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dmed/errors.hpp"

namespace dmed::quad {

inline constexpr double kAbsTol = 1e-10;
inline constexpr unsigned kMaxDepth = 15;

/// Adaptive Gauss-Kronrod (15 point) on a finite interval.
/// Throws QuadratureError when the error estimate exceeds the absolute
/// tolerance (relaxed to 1e-12 relative for large integrals).
template <typename F>
double integrate(F&& f, double a, double b) {
  if (a == b) return 0.0;
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, kMaxDepth, 1e-13, &err);
  if (!std::isfinite(v) || err > std::max(kAbsTol, 1e-12 * std::abs(v))) {
    throw QuadratureError("quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                          "] missed tolerance (error estimate " + std::to_string(err) + ")");
  }
  return v;
}

/// Fixed 20-point Gauss-Legendre rule; for integrands that are analytic
/// and nearly constant across [a, b].
template <typename F>
double gauss_legendre(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

}  // namespace dmed::quad
