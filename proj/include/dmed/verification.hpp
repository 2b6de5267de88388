#pragma once

// Randomized property suite for the divergence solver. Each property is
// checked on independent random finite-support instances and reports the
// first failing instance verbatim so it can be replayed.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "dmed/arm_models.hpp"
#include "dmed/divergence.hpp"
#include "dmed/oracle.hpp"

namespace dmed::verify {

struct Instance {
  EmpiricalDist dist;
  double mu = 0.0;
};

inline std::string describe(const Instance& in) {
  std::string s = "atoms=[";
  char buf[96];
  bool first = true;
  for (const Atom& a : in.dist.atoms()) {
    std::snprintf(buf, sizeof buf, "%s(%.17g,%.17g)", first ? "" : ",", a.value, a.weight);
    s += buf;
    first = false;
  }
  std::snprintf(buf, sizeof buf, "] mu=%.17g", in.mu);
  return s + buf;
}

/// Random distribution with 1..max_atoms atoms in [lo, 1] (an atom lands
/// exactly on 1 with probability 0.15) and mu uniform in (mean, mu_cap).
/// `min_gap` keeps mu at least that far above the mean.
inline Instance random_instance(RngStream& rng, std::size_t max_atoms = 8, double lo = -5.0,
                                double mu_cap = 0.99, double min_gap = 0.0) {
  for (;;) {
    Instance in;
    const auto atoms = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_atoms));
    for (std::size_t k = 0; k < std::min(atoms, max_atoms); ++k) {
      const double x = rng.uniform() < 0.15 ? 1.0 : lo + (1.0 - lo) * rng.uniform();
      in.dist.add(x, 0.05 + rng.uniform());
    }
    const double m = in.dist.mean();
    if (m + min_gap >= mu_cap) continue;
    in.mu = m + min_gap + (mu_cap - m - min_gap) * (0.001 + 0.998 * rng.uniform());
    return in;
  }
}

/// Affine map x -> a + (1-a) x applied to every atom.
inline EmpiricalDist affine_image(const EmpiricalDist& f, double a) {
  EmpiricalDist g;
  for (const Atom& atom : f.atoms()) g.add(std::min(1.0, a + (1.0 - a) * atom.value), atom.weight);
  return g;
}

struct PropertyResult {
  std::string name;
  std::uint64_t instances = 0;
  std::uint64_t failures = 0;
  std::string first_failure;

  bool pass() const { return failures == 0; }
};

namespace detail {

inline void record(PropertyResult& r, bool ok, const Instance& in, const std::string& detail) {
  ++r.instances;
  if (ok) return;
  if (r.failures++ == 0) r.first_failure = describe(in) + " " + detail;
}

inline std::string fmt(const char* label, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%.17g", label, v);
  return buf;
}

}  // namespace detail

inline constexpr double kPrimalDualTol = 1e-4;
inline constexpr double kKktTol = 1e-8;
inline constexpr double kDerivTol = 1e-3;
inline constexpr double kDerivStep = 1e-5;
inline constexpr double kScaleTol = 1e-10;

/// Runs every property on `trials` random instances drawn from `seed`.
inline std::vector<PropertyResult> run_dinf_property_suite(std::uint64_t trials, std::uint64_t seed) {
  auto named = [](const char* name) {
    PropertyResult r;
    r.name = name;
    return r;
  };
  PropertyResult primal = named("primal_dual_equality"), kkt = named("kkt_conditions"),
                 concave = named("concavity"), deriv = named("derivative_in_mu"),
                 monotone = named("monotone_in_mu"), scale = named("scale_invariance"),
                 zero = named("zero_iff_mean_ge_mu");
  RngStream rng(seed, 0);

  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const Instance in = random_instance(rng);
    const DualSolution sol = solve_nu_star(in.dist, in.mu);

    {
      const double p = oracle::dinf_primal_oracle(in.dist, in.mu);
      const double d = oracle::dinf_dual_grid(in.dist, in.mu);
      const bool ok = std::abs(sol.dinf - p) <= kPrimalDualTol && d <= sol.dinf + 1e-9;
      detail::record(primal, ok, in,
                     detail::fmt("dinf", sol.dinf) + " " + detail::fmt("primal", p) + " " + detail::fmt("dual_grid", d));
    }
    {
      bool ok = true;
      double resid = 0.0;
      if (sol.at_boundary) {
        resid = in.dist.expect_inv_gap(in.mu);
        ok = resid <= 1.0 + kKktTol;
      } else {
        // E[1/(1-(X-mu)nu)] = 1 + nu E[(X-mu)/(1-(X-mu)nu)]
        resid = 1.0 + sol.nu_star * in.dist.expect_ratio(sol.nu_star, in.mu);
        ok = std::abs(resid - 1.0) <= kKktTol;
      }
      detail::record(kkt, ok, in, detail::fmt(sol.at_boundary ? "inv_gap" : "tilt_mass", resid));
    }
    {
      const double hi = 1.0 / (1.0 - in.mu);
      bool ok = true;
      double worst = -kInf;
      for (int k = 1; k <= 7; ++k) {
        const double nu = hi * k / 8.0;
        const double l2 = lagrangian_derivs(in.dist, in.mu, nu).second;
        worst = std::max(worst, l2);
        ok = ok && l2 <= 0.0;
      }
      detail::record(concave, ok, in, detail::fmt("max_L2", worst));
    }
    {
      const double mu_hi = std::min(in.mu + kDerivStep, 1.0 - 1e-12);
      const double up = dinf(in.dist, mu_hi);
      const double slope = (up - sol.dinf) / (mu_hi - in.mu);
      const bool ok = up >= sol.dinf - 1e-12 && slope >= -1e-9 && slope <= 1.0 / (1.0 - mu_hi) + kDerivTol;
      detail::record(monotone, ok, in, detail::fmt("slope", slope));
    }
    {
      // Central difference needs a margin above the mean.
      const Instance far = random_instance(rng, 8, -5.0, 0.99, 0.05);
      const double h = kDerivStep;
      const double fd = (dinf(far.dist, far.mu + h) - dinf(far.dist, far.mu - h)) / (2 * h);
      const double nu = dinf_deriv_mu(far.dist, far.mu);
      detail::record(deriv, std::abs(fd - nu) <= kDerivTol, far, detail::fmt("fd", fd) + " " + detail::fmt("nu_star", nu));
    }
    {
      bool ok = true;
      double worst = 0.0;
      for (double a : {-5.0, -1.0, -0.1}) {
        const EmpiricalDist g = affine_image(in.dist, a);
        const double diff = std::abs(dinf(g, a + (1.0 - a) * in.mu) - sol.dinf);
        worst = std::max(worst, diff);
        ok = ok && diff <= kScaleTol;
      }
      detail::record(scale, ok, in, detail::fmt("max_diff", worst));
    }
    {
      const double m = in.dist.mean();
      const bool ok = dinf(in.dist, std::min(m, 1.0 - 1e-12)) == 0.0 && dinf(in.dist, m - 0.5) == 0.0 &&
                      sol.dinf > 0.0;
      detail::record(zero, ok, in, detail::fmt("dinf", sol.dinf));
    }
  }
  return {primal, kkt, concave, deriv, monotone, scale, zero};
}

}  // namespace dmed::verify
