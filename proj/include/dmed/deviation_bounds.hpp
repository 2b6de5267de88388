#pragma once

// Chernoff rates, the deviation bounds for the empirical index, and the
// finite-time regret bound of DMED.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dmed/arm_models.hpp"
#include "dmed/divergence.hpp"
#include "dmed/errors.hpp"

namespace dmed {

/// Smallest constant for which the lower-deviation rate is licensed.
inline constexpr double kRateConstantC0 = 2.163;

struct LegendrePoint {
  double x = 0.0;
  double lambda_star = 0.0;  // may be +-inf when the sup is a limit
  double value = 0.0;        // may be +inf outside the support hull
};

namespace detail {

inline constexpr double kInvPhi = 0.6180339887498949;
inline constexpr double kEdgeGap = 1e-10;

// Maximizes the concave g on [a, b] by golden-section search.
template <typename G>
double golden_max(G&& g, double a, double b, double& best_val) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 300 && (b - a) > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kInvPhi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kInvPhi * (b - a);
      gd = g(d);
    }
  }
  if (gc >= gd) {
    best_val = gc;
    return c;
  }
  best_val = gd;
  return d;
}

}  // namespace detail

/// Lambda*(x) = sup_lambda { lambda x - log E[exp(lambda X)] }.
inline LegendrePoint legendre(const ArmModel& model, double x) {
  const double m = mean(model);
  if (x == m) return {x, 0.0, 0.0};

  const SupportHull hull = support_hull(model);
  if (x > hull.hi || x < hull.lo) return {x, x > hull.hi ? kInf : -kInf, kInf};
  if (x == hull.hi || x == hull.lo) {
    const double mass = point_mass(model, x);
    return {x, x == hull.hi ? kInf : -kInf, mass > 0.0 ? -std::log(mass) : kInf};
  }

  auto g = [&](double lambda) { return lambda * x - log_mgf(model, lambda); };
  const LambdaDomain dom = lambda_domain(model);
  const double dir = x > m ? 1.0 : -1.0;
  const double edge = dir > 0 ? dom.hi : dom.lo;

  double a = 0.0, b = 0.0, c = 0.0;
  if (std::isfinite(edge)) {
    // Concave on a bounded side of the domain: search up to the edge.
    b = edge - dir * detail::kEdgeGap * std::max(1.0, std::abs(edge));
    a = 0.0;
    c = b;
    if (dir < 0) std::swap(a, c);
  } else {
    // Expand until g drops: then the maximizer lies in [prev, cur].
    double prev = 0.0, g_prev = 0.0;
    double step = 1.0;
    double cur = dir * step;
    double g_cur = g(cur);
    double prev2 = 0.0;
    while (g_cur >= g_prev && std::abs(cur) < 1e15) {
      prev2 = prev;
      prev = cur;
      g_prev = g_cur;
      step *= 2.0;
      cur = dir * step;
      g_cur = g(cur);
    }
    a = std::min(prev2, cur);
    c = std::max(prev2, cur);
  }
  double best = 0.0;
  const double lambda_star = detail::golden_max(g, std::min(a, c), std::max(a, c), best);
  if (best <= 0.0) return {x, 0.0, 0.0};
  return {x, lambda_star, best};
}

/// u_I(v, E(F), mu): the exponential rate in the lower deviation bound.
inline double rate_u_I(double v, double mean_f, double mu) {
  if (!(mu < 1.0)) throw DomainError("rate_u_I requires mu < 1");
  if (!(v > 0.0)) throw DomainError("rate_u_I requires v > 0");
  const double s = kRateConstantC0 + (1.0 - mean_f) / (1.0 - mu);
  if (v <= 0.5 * s) return v * v / (2.0 * s);
  return 0.5 * v - s / 8.0;
}

/// Bound on P[D_inf(F_t, mu) <= D_inf(F, mu) - v] for mu > E(F).
inline double lower_dev_bound(std::uint64_t t, double v, double mean_f, double mu) {
  if (!(mu > mean_f)) throw DomainError("lower_dev_bound requires mu > mean(F)");
  if (t == 0) return 1.0;
  return std::min(1.0, std::exp(-static_cast<double>(t) * rate_u_I(v, mean_f, mu)));
}

/// Bound on P[D_inf(F_t, mu) >= u, mean(F_t) <= mu] for mu < E(F).
inline double upper_dev_bound(std::uint64_t t, double u, double legendre_at_mu) {
  if (t == 0) throw DomainError("upper_dev_bound requires t >= 1");
  const double td = static_cast<double>(t);
  double b = 0.0;
  if (u <= legendre_at_mu) {
    b = 2.0 * std::exp(-td * legendre_at_mu);
  } else {
    b = 2.0 * std::numbers::e * (1.0 + td) * std::exp(-td * u);
  }
  return std::min(1.0, b);
}

/// Chernoff rate of one arm at one point, as used in the constant term.
struct RateEntry {
  std::size_t arm;
  double x;
  double value;
};

/// The four summands of the regret constant.
struct BoundComponents {
  double u_I = 0.0;           // u_I(xi, mu_i, mu*)
  double index_term = 0.0;    // 1 / (1 - e^{-u_I})
  double optimal_term = 0.0;  // sum over optimal k of K / (1 - e^{-Lambda*_k(mu* - delta)})
  double suboptimal_term = 0.0;
  double min_optimal_term = 0.0;
  std::size_t min_attained_by = 0;

  double sum() const { return index_term + optimal_term + suboptimal_term + min_optimal_term; }
};

struct BoundReport {
  std::size_t arm_index = 0;  // zero-based
  std::uint64_t n = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double r = 0.0;
  double mu_star = 0.0;
  double mu_prime = 0.0;
  double xi = 0.0;
  double dinf_true = 0.0;
  double log_coeff = 0.0;
  double constant_C = 0.0;
  BoundComponents components;
  std::vector<std::size_t> optimal_arms;
  std::vector<RateEntry> rates_at_mu_star_minus_delta;  // optimal arms
  std::vector<RateEntry> rates_at_mu_prime_plus_delta;  // every arm

  /// log_coeff * log n + C, the bound on E[T_i(n)].
  double total() const { return log_coeff * std::log(static_cast<double>(n)) + constant_C; }
};

namespace detail {

struct BoundSetup {
  std::vector<double> means;
  double mu_star;
  double mu_prime;
  std::vector<std::size_t> optimal;
  double dinf_true;
};

inline BoundSetup bound_setup(std::span<const ArmModel> truth, std::size_t i) {
  if (truth.size() < 2) throw InfeasibleParameters("need at least two arms");
  if (i >= truth.size()) throw InfeasibleParameters("arm index out of range");
  BoundSetup s;
  for (const auto& m : truth) s.means.push_back(mean(m));
  s.mu_star = *std::max_element(s.means.begin(), s.means.end());
  if (!(s.mu_star < 1.0)) throw InfeasibleParameters("mu* < 1 violated");
  s.mu_prime = -kInf;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (s.means[k] == s.mu_star) {
      s.optimal.push_back(k);
    } else {
      s.mu_prime = std::max(s.mu_prime, s.means[k]);
    }
  }
  if (s.means[i] == s.mu_star) throw InfeasibleParameters("arm " + std::to_string(i + 1) + " is optimal");
  s.dinf_true = dinf(model_view(truth[i]), s.mu_star);
  return s;
}

inline double one_minus_exp_neg(double rate) { return -std::expm1(-rate); }

inline BoundReport regret_bound_from(std::span<const ArmModel> truth, const BoundSetup& s, std::size_t i,
                                     std::uint64_t n, double epsilon, double delta, double r) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InfeasibleParameters("epsilon in (0,1) violated");
  if (!(r > 0.0 && r < 1.0)) throw InfeasibleParameters("r in (0,1) violated");
  if (!(delta > 0.0 && delta < s.mu_star - s.mu_prime)) {
    throw InfeasibleParameters("delta in (0, mu* - mu') violated: delta=" + std::to_string(delta) +
                               ", mu* - mu'=" + std::to_string(s.mu_star - s.mu_prime));
  }
  BoundReport rep;
  rep.arm_index = i;
  rep.n = n;
  rep.epsilon = epsilon;
  rep.delta = delta;
  rep.r = r;
  rep.mu_star = s.mu_star;
  rep.mu_prime = s.mu_prime;
  rep.optimal_arms = s.optimal;
  rep.dinf_true = s.dinf_true;
  rep.xi = epsilon * s.dinf_true - delta / (1.0 - s.mu_star);
  if (!(rep.xi > 0.0)) {
    throw InfeasibleParameters("xi > 0 violated: xi=" + std::to_string(rep.xi));
  }
  rep.log_coeff = 1.0 / ((1.0 - epsilon) * (1.0 - r) * s.dinf_true);

  const double K = static_cast<double>(truth.size());
  BoundComponents& c = rep.components;
  c.u_I = rate_u_I(rep.xi, s.means[i], s.mu_star);
  c.index_term = 1.0 / one_minus_exp_neg(c.u_I);

  const double lo_point = s.mu_star - delta;
  const double hi_point = s.mu_prime + delta;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double at_hi = legendre(truth[k], hi_point).value;
    rep.rates_at_mu_prime_plus_delta.push_back({k, hi_point, at_hi});
    if (s.means[k] == s.mu_star) {
      const double at_lo = legendre(truth[k], lo_point).value;
      rep.rates_at_mu_star_minus_delta.push_back({k, lo_point, at_lo});
      c.optimal_term += K / one_minus_exp_neg(at_lo);
      const double q = one_minus_exp_neg(r * at_hi);
      const double cand =
          2.0 * (1.0 + K) / one_minus_exp_neg(at_hi) + 2.0 * std::numbers::e / (r * q * q);
      if (k == s.optimal.front() || cand < c.min_optimal_term) {
        c.min_optimal_term = cand;
        c.min_attained_by = k;
      }
    } else {
      c.suboptimal_term += K / one_minus_exp_neg(at_hi);
    }
  }
  rep.constant_C = c.sum();
  return rep;
}

}  // namespace detail

/// Finite-time bound E[T_i(n)] <= log_coeff * log n + C for DMED with
/// parameter r, at the free parameters (epsilon, delta). `i` is zero-based.
inline BoundReport regret_bound(std::span<const ArmModel> truth, std::size_t i, std::uint64_t n, double epsilon,
                                double delta, double r) {
  const auto setup = detail::bound_setup(truth, i);
  return detail::regret_bound_from(truth, setup, i, n, epsilon, delta, r);
}

struct BoundGrid {
  std::vector<double> epsilons;
  std::vector<double> deltas;

  /// epsilon over {0.05, ..., 0.95}; delta log-spaced strictly inside (0, gap).
  static BoundGrid defaults(double gap, int n_eps = 19, int n_delta = 40) {
    BoundGrid g;
    for (int k = 1; k <= n_eps; ++k) g.epsilons.push_back(static_cast<double>(k) / (n_eps + 1));
    for (int k = 0; k < n_delta; ++k) {
      const double expo = -4.0 + 4.0 * static_cast<double>(k + 1) / (n_delta + 1);
      g.deltas.push_back(gap * std::pow(10.0, expo));
    }
    return g;
  }
};

struct BoundSearchResult {
  double epsilon;
  double delta;
  BoundReport report;
};

/// Grid search over feasible (epsilon, delta) minimizing the bound at round n.
/// An empty `grid` selects BoundGrid::defaults for the instance's gap.
inline BoundSearchResult optimize_bound_params(std::span<const ArmModel> truth, std::size_t i, std::uint64_t n,
                                               double r, const BoundGrid& grid = {}) {
  const auto setup = detail::bound_setup(truth, i);
  const double gap = setup.mu_star - setup.mu_prime;
  const BoundGrid g = (grid.epsilons.empty() || grid.deltas.empty()) ? BoundGrid::defaults(gap) : grid;

  bool found = false;
  BoundSearchResult best{0.0, 0.0, {}};
  for (double delta : g.deltas) {
    if (!(delta > 0.0 && delta < gap)) continue;
    for (double eps : g.epsilons) {
      if (!(eps > 0.0 && eps < 1.0)) continue;
      if (!(eps * setup.dinf_true - delta / (1.0 - setup.mu_star) > 0.0)) continue;
      BoundReport rep = detail::regret_bound_from(truth, setup, i, n, eps, delta, r);
      if (!found || rep.total() < best.report.total()) {
        best = {eps, delta, std::move(rep)};
        found = true;
      }
    }
  }
  if (!found) throw InfeasibleParameters("no feasible (epsilon, delta) pair on the grid");
  return best;
}

}  // namespace dmed
