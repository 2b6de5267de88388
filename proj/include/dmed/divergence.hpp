#pragma once

// Minimum empirical divergence D_inf(F, mu) through its one-dimensional
// concave dual
//
//   D_inf(F, mu) = max_{0 <= nu <= 1/(1-mu)} L(nu; F, mu),
//   L(nu; F, mu) = E_F[log(1 - (X - mu) nu)],
//
// valid for any F supported on (-inf, 1] and mu < 1.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <string>

#include "dmed/empirical_dist.hpp"
#include "dmed/errors.hpp"

namespace dmed {

/// Anything that can report the expectations the dual objective needs.
template <typename D>
concept DistView = requires(const D& d, double nu, double mu) {
  { d.mean() } -> std::convertible_to<double>;
  { d.expect_log(nu, mu) } -> std::convertible_to<double>;
  { d.expect_ratio(nu, mu) } -> std::convertible_to<double>;
  { d.expect_ratio_sq(nu, mu) } -> std::convertible_to<double>;
  { d.expect_inv_gap(mu) } -> std::convertible_to<double>;
};

static_assert(DistView<EmpiricalDist>);

struct LagrangianDerivs {
  double first;   // L'(nu)
  double second;  // L''(nu), never positive
};

struct DualSolution {
  double nu_star = 0.0;
  double dinf = 0.0;
  bool at_boundary = false;
  int iterations = 0;
};

namespace detail {

inline void check_mu(double mu) {
  if (!(mu < 1.0)) throw DomainError("mu must be < 1, got " + std::to_string(mu));
}

inline double nu_upper(double mu) { return 1.0 / (1.0 - mu); }

inline void check_nu(double nu, double mu) {
  // Slack of a few ulps so callers may pass the computed 1/(1-mu) verbatim.
  const double hi = nu_upper(mu);
  if (!(nu >= 0.0) || nu > hi * (1.0 + 4 * std::numeric_limits<double>::epsilon())) {
    throw DomainError("nu=" + std::to_string(nu) + " outside [0, 1/(1-mu)]");
  }
}

constexpr int kMaxSolverIterations = 400;
constexpr double kGradTol = 1e-12;
constexpr double kWidthTol = 1e-14;
constexpr double kBoundaryShrink = 1e-12;

}  // namespace detail

/// L(nu; F, mu). Returns -inf when F has mass at 1 and nu = 1/(1-mu).
template <DistView D>
double lagrangian(const D& dist, double mu, double nu) {
  detail::check_mu(mu);
  detail::check_nu(nu, mu);
  if (nu == 0.0) return 0.0;
  return dist.expect_log(nu, mu);
}

/// First and second derivatives of L in nu, for nu strictly inside the domain.
template <DistView D>
LagrangianDerivs lagrangian_derivs(const D& dist, double mu, double nu) {
  detail::check_mu(mu);
  detail::check_nu(nu, mu);
  return {-dist.expect_ratio(nu, mu), -dist.expect_ratio_sq(nu, mu)};
}

/// Maximizer nu* of the dual and the value D_inf(F, mu).
///
/// When mean(F) >= mu the optimum is nu* = 0. Otherwise the boundary
/// 1/(1-mu) is optimal iff E[(1-mu)/(1-X)] <= 1; else nu* is the unique root
/// of the strictly decreasing L'. The root is found by Newton steps on L'
/// safeguarded by a shrinking bisection bracket.
template <DistView D>
DualSolution solve_nu_star(const D& dist, double mu) {
  detail::check_mu(mu);
  if (dist.mean() >= mu) return {};

  const double nu_max = detail::nu_upper(mu);
  const double inv_gap = dist.expect_inv_gap(mu);
  if (inv_gap <= 1.0) {
    return {nu_max, dist.expect_log(nu_max, mu), true, 0};
  }

  double lo = 0.0;
  double hi = nu_max * (1.0 - detail::kBoundaryShrink);
  // The root may sit in the last sliver before the boundary; treat it as
  // the boundary solution.
  if (-dist.expect_ratio(hi, mu) >= 0.0) {
    return {nu_max, dist.expect_log(nu_max, mu), true, 0};
  }

  double nu = 0.5 * (lo + hi);
  int it = 0;
  for (; it < detail::kMaxSolverIterations; ++it) {
    const double g = -dist.expect_ratio(nu, mu);
    if (std::abs(g) <= detail::kGradTol) break;
    if (g > 0.0) {
      lo = nu;
    } else {
      hi = nu;
    }
    if (hi - lo <= detail::kWidthTol * std::max(1.0, hi)) break;

    const double h = -dist.expect_ratio_sq(nu, mu);
    double next = (h < 0.0) ? nu - g / h : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == nu) break;
    nu = next;
  }
  if (it == detail::kMaxSolverIterations) {
    throw ConvergenceError("solve_nu_star: no convergence for mu=" + std::to_string(mu));
  }
  return {nu, dist.expect_log(nu, mu), false, it + 1};
}

/// D_inf(F, mu) = max over nu in [0, 1/(1-mu)] of L(nu; F, mu).
template <DistView D>
double dinf(const D& dist, double mu) {
  return solve_nu_star(dist, mu).dinf;
}

/// d D_inf / d mu = nu*(F, mu), defined for mu > mean(F).
template <DistView D>
double dinf_deriv_mu(const D& dist, double mu) {
  detail::check_mu(mu);
  if (!(mu > dist.mean())) {
    throw DomainError("dinf_deriv_mu requires mu > mean(F)");
  }
  return solve_nu_star(dist, mu).nu_star;
}

/// F_(a): moves all mass below `a` onto the single point `a`.
inline EmpiricalDist truncate_at(const EmpiricalDist& dist, double a) {
  if (!(a < 1.0)) throw DomainError("truncate_at requires a < 1");
  EmpiricalDist out;
  double moved = 0.0;
  for (const Atom& atom : dist.atoms()) {
    if (atom.value < a) {
      moved += atom.weight;
    } else {
      out.add(atom.value, atom.weight);
    }
  }
  if (moved > 0.0) out.add(a, moved);
  return out;
}

}  // namespace dmed
