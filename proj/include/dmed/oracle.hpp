#pragma once

// Brute-force references for D_inf on small finite supports. These never
// call the dual solver: the primal route builds explicit feasible
// distributions G and evaluates D(F||G) from its definition, and the dual
// route scans L(nu) on a dense grid.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dmed/empirical_dist.hpp"
#include "dmed/errors.hpp"

namespace dmed::oracle {

inline constexpr std::size_t kMaxOracleAtoms = 12;
inline constexpr double kDefaultGridStep = 1e-4;

namespace detail {

struct Normalized {
  std::vector<double> x;
  std::vector<double> p;
  double mass_at_one = 0.0;
};

inline Normalized normalize(const EmpiricalDist& f) {
  if (f.size() > kMaxOracleAtoms) throw DomainError("oracle supports at most 12 atoms");
  Normalized n;
  for (const Atom& a : f.atoms()) {
    const double p = a.weight / f.total_weight();
    if (a.value == 1.0) {
      n.mass_at_one += p;
    } else {
      n.x.push_back(a.value);
      n.p.push_back(p);
    }
  }
  return n;
}

inline double plain_mean(const Normalized& n) {
  double m = n.mass_at_one;
  for (std::size_t k = 0; k < n.x.size(); ++k) m += n.p[k] * n.x[k];
  return m;
}

// D(F||G) for the candidate G built from the tilt
//   G(x) = F(x) / (1 - (x - mu) nu)   for x < 1,
// with the leftover mass at 1, mixed with a point mass at 1 if its mean
// still falls short of mu. Returns +inf when no distribution results.
inline double tilted_candidate_kl(const Normalized& f, double mu, double nu) {
  std::vector<double> g(f.x.size());
  double s = 0.0;
  for (std::size_t k = 0; k < f.x.size(); ++k) {
    const double y = 1.0 - (f.x[k] - mu) * nu;
    if (y <= 0.0) return std::numeric_limits<double>::infinity();
    g[k] = f.p[k] / y;
    s += g[k];
  }
  double g_one = 1.0 - s;
  if (g_one < 0.0) return std::numeric_limits<double>::infinity();
  double mean_g = g_one;
  for (std::size_t k = 0; k < f.x.size(); ++k) mean_g += g[k] * f.x[k];
  if (mean_g < mu) {
    const double alpha = (mu - mean_g) / (1.0 - mean_g);
    for (double& gk : g) gk *= (1.0 - alpha);
    g_one = (1.0 - alpha) * g_one + alpha;
  }
  double kl = 0.0;
  for (std::size_t k = 0; k < f.x.size(); ++k) kl += f.p[k] * (std::log(f.p[k]) - std::log(g[k]));
  if (f.mass_at_one > 0.0) {
    if (g_one <= 0.0) return std::numeric_limits<double>::infinity();
    kl += f.mass_at_one * (std::log(f.mass_at_one) - std::log(g_one));
  }
  return kl;
}

inline double dual_objective(const Normalized& f, double mu, double nu) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.x.size(); ++k) s += f.p[k] * std::log(1.0 - (f.x[k] - mu) * nu);
  if (f.mass_at_one > 0.0) {
    const double y = 1.0 - (1.0 - mu) * nu;
    if (y <= 0.0) return -std::numeric_limits<double>::infinity();
    s += f.mass_at_one * std::log(y);
  }
  return s;
}

// Dense scan of [0, nu_max] followed by golden refinement around the best
// grid point. `sign` = +1 maximizes, -1 minimizes.
template <typename Obj>
double scan_then_refine(Obj&& obj, double nu_max, double step, double sign) {
  const auto cells = static_cast<std::size_t>(std::ceil(1.0 / step));
  std::size_t best_k = 0;
  double best = sign * obj(0.0);
  for (std::size_t k = 1; k <= cells; ++k) {
    const double v = sign * obj(nu_max * static_cast<double>(k) / static_cast<double>(cells));
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  double a = nu_max * static_cast<double>(best_k == 0 ? 0 : best_k - 1) / static_cast<double>(cells);
  double b = nu_max * static_cast<double>(std::min(best_k + 1, cells)) / static_cast<double>(cells);
  constexpr double r = 0.6180339887498949;
  for (int it = 0; it < 120; ++it) {
    const double c = b - r * (b - a);
    const double d = a + r * (b - a);
    const double vc = sign * obj(c);
    const double vd = sign * obj(d);
    best = std::max({best, vc, vd});
    if (vc >= vd) {
      b = d;
    } else {
      a = c;
    }
  }
  return sign * best;
}

}  // namespace detail

/// Smallest D(F||G) found over explicit feasible G on supp(F) and {1}.
/// Every candidate is feasible, so the result is an upper bound on D_inf
/// that becomes tight as `grid_step` (relative to the nu range) shrinks.
inline double dinf_primal_oracle(const EmpiricalDist& f, double mu, double grid_step = kDefaultGridStep) {
  if (!(mu < 1.0)) throw DomainError("oracle requires mu < 1");
  const auto n = detail::normalize(f);
  if (detail::plain_mean(n) >= mu) return 0.0;
  const double nu_max = 1.0 / (1.0 - mu);
  const double v = detail::scan_then_refine(
      [&](double nu) { return detail::tilted_candidate_kl(n, mu, nu); }, nu_max, grid_step, -1.0);
  return std::max(0.0, v);
}

/// max over a dense nu grid of E_F[log(1 - (X-mu) nu)]; a lower bound on D_inf.
inline double dinf_dual_grid(const EmpiricalDist& f, double mu, double grid_step = kDefaultGridStep) {
  if (!(mu < 1.0)) throw DomainError("oracle requires mu < 1");
  const auto n = detail::normalize(f);
  const double nu_max = 1.0 / (1.0 - mu);
  return std::max(0.0, detail::scan_then_refine([&](double nu) { return detail::dual_objective(n, mu, nu); },
                                                nu_max, grid_step, 1.0));
}

}  // namespace dmed::oracle
