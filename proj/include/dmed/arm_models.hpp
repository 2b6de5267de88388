#pragma once

// Parametric reward distributions supported on (-inf, 1] whose moment
// generating function is finite near the origin.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "dmed/empirical_dist.hpp"
#include "dmed/errors.hpp"
#include "dmed/quadrature.hpp"

namespace dmed {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// X = x1 with probability p, x0 otherwise.
struct TwoPoint {
  double x0 = 0.0;
  double x1 = 1.0;
  double p = 0.5;
};

/// Bernoulli(p) on {0, 1}; same law as TwoPoint{0, 1, p}.
struct Bernoulli {
  double p = 0.5;
};

struct UniformInterval {
  double a = 0.0;
  double b = 1.0;
};

/// X = 1 - E with E ~ Exp(rate). MGF finite for lambda > -rate.
struct ShiftedNegExponential {
  double rate = 1.0;
};

/// X = 1 - G with G ~ Gamma(shape, rate). MGF finite for lambda > -rate.
struct ShiftedNegGamma {
  double shape = 1.0;
  double rate = 1.0;
};

struct FiniteSupport {
  std::vector<double> values;
  std::vector<double> probs;
};

using ArmModel =
    std::variant<Bernoulli, TwoPoint, UniformInterval, ShiftedNegExponential, ShiftedNegGamma, FiniteSupport>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline std::string family_name(const ArmModel& m) {
  return std::visit(overloaded{
                        [](const Bernoulli&) { return std::string("bernoulli"); },
                        [](const TwoPoint&) { return std::string("two_point"); },
                        [](const UniformInterval&) { return std::string("uniform"); },
                        [](const ShiftedNegExponential&) { return std::string("shifted_neg_exponential"); },
                        [](const ShiftedNegGamma&) { return std::string("shifted_neg_gamma"); },
                        [](const FiniteSupport&) { return std::string("finite_support"); },
                    },
                    m);
}

/// Throws DomainError when the parameters leave the model class.
inline void validate(const ArmModel& m) {
  auto prob = [](double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0,1]");
  };
  std::visit(overloaded{
                 [&](const Bernoulli& b) { prob(b.p); },
                 [&](const TwoPoint& t) {
                   prob(t.p);
                   if (!(t.x0 <= 1.0 && t.x1 <= 1.0)) throw DomainError("two_point: support must be <= 1");
                 },
                 [](const UniformInterval& u) {
                   if (!(u.a < u.b && u.b <= 1.0) || !std::isfinite(u.a)) {
                     throw DomainError("uniform: need a < b <= 1");
                   }
                 },
                 [](const ShiftedNegExponential& e) {
                   if (!(e.rate > 0.0) || !std::isfinite(e.rate)) throw DomainError("rate must be positive");
                 },
                 [](const ShiftedNegGamma& g) {
                   if (!(g.rate > 0.0 && g.shape > 0.0) || !std::isfinite(g.rate) || !std::isfinite(g.shape)) {
                     throw DomainError("shape and rate must be positive");
                   }
                 },
                 [&](const FiniteSupport& f) {
                   if (f.values.empty() || f.values.size() != f.probs.size()) {
                     throw DomainError("finite_support: values/probs size mismatch");
                   }
                   double s = 0.0;
                   for (std::size_t k = 0; k < f.values.size(); ++k) {
                     if (!(f.values[k] <= 1.0)) throw DomainError("finite_support: value exceeds 1");
                     prob(f.probs[k]);
                     s += f.probs[k];
                   }
                   if (std::abs(s - 1.0) > 1e-9) throw DomainError("finite_support: probabilities must sum to 1");
                 },
             },
             m);
}

/// Support points and probabilities of a discrete family; nullopt otherwise.
inline std::optional<EmpiricalDist> discrete_atoms(const ArmModel& m) {
  auto two = [](double x0, double x1, double p) {
    EmpiricalDist d;
    if (p < 1.0) d.add(x0, 1.0 - p);
    if (p > 0.0) d.add(x1, p);
    return d;
  };
  return std::visit(overloaded{
                        [&](const Bernoulli& b) -> std::optional<EmpiricalDist> { return two(0.0, 1.0, b.p); },
                        [&](const TwoPoint& t) -> std::optional<EmpiricalDist> { return two(t.x0, t.x1, t.p); },
                        [](const FiniteSupport& f) -> std::optional<EmpiricalDist> {
                          EmpiricalDist d;
                          for (std::size_t k = 0; k < f.values.size(); ++k) {
                            if (f.probs[k] > 0.0) d.add(f.values[k], f.probs[k]);
                          }
                          return d;
                        },
                        [](const auto&) -> std::optional<EmpiricalDist> { return std::nullopt; },
                    },
                    m);
}

inline double mean(const ArmModel& m) {
  return std::visit(overloaded{
                        [](const Bernoulli& b) { return b.p; },
                        [](const TwoPoint& t) { return (1.0 - t.p) * t.x0 + t.p * t.x1; },
                        [](const UniformInterval& u) { return 0.5 * (u.a + u.b); },
                        [](const ShiftedNegExponential& e) { return 1.0 - 1.0 / e.rate; },
                        [](const ShiftedNegGamma& g) { return 1.0 - g.shape / g.rate; },
                        [](const FiniteSupport& f) {
                          double s = 0.0;
                          for (std::size_t k = 0; k < f.values.size(); ++k) s += f.values[k] * f.probs[k];
                          return s;
                        },
                    },
                    m);
}

/// Closed interval hull of the support; the lower end may be -inf.
struct SupportHull {
  double lo;
  double hi;
};

inline SupportHull support_hull(const ArmModel& m) {
  if (auto atoms = discrete_atoms(m)) {
    double lo = kInf, hi = -kInf;
    for (const Atom& a : atoms->atoms()) {
      lo = std::min(lo, a.value);
      hi = std::max(hi, a.value);
    }
    return {lo, hi};
  }
  if (const auto* u = std::get_if<UniformInterval>(&m)) return {u->a, u->b};
  return {-kInf, 1.0};
}

/// P(X = x); zero for the continuous families.
inline double point_mass(const ArmModel& m, double x) {
  if (auto atoms = discrete_atoms(m)) {
    for (const Atom& a : atoms->atoms()) {
      if (a.value == x) return a.weight / atoms->total_weight();
    }
  }
  return 0.0;
}

/// Open interval of lambda on which the MGF is finite.
struct LambdaDomain {
  double lo;
  double hi;
};

inline LambdaDomain lambda_domain(const ArmModel& m) {
  if (const auto* e = std::get_if<ShiftedNegExponential>(&m)) return {-e->rate, kInf};
  if (const auto* g = std::get_if<ShiftedNegGamma>(&m)) return {-g->rate, kInf};
  return {-kInf, kInf};
}

namespace detail {

inline double log_sum_exp_mgf(const EmpiricalDist& d, double lambda) {
  double top = -kInf;
  for (const Atom& a : d.atoms()) top = std::max(top, lambda * a.value);
  double s = 0.0;
  for (const Atom& a : d.atoms()) s += a.weight * std::exp(lambda * a.value - top);
  return top + std::log(s / d.total_weight());
}

}  // namespace detail

/// log E[exp(lambda X)]; +inf outside the family's lambda domain.
inline double log_mgf(const ArmModel& m, double lambda) {
  if (lambda == 0.0) return 0.0;
  if (auto atoms = discrete_atoms(m)) return detail::log_sum_exp_mgf(*atoms, lambda);
  return std::visit(
      overloaded{
          [&](const UniformInterval& u) {
            const double w = u.b - u.a;
            const double lw = lambda * w;
            if (lambda > 0.0) return lambda * u.b + std::log(-std::expm1(-lw) / lw);
            return lambda * u.a + std::log(std::expm1(lw) / lw);
          },
          [&](const ShiftedNegExponential& e) {
            if (!(lambda > -e.rate)) return kInf;
            return lambda - std::log1p(lambda / e.rate);
          },
          [&](const ShiftedNegGamma& g) {
            if (!(lambda > -g.rate)) return kInf;
            return lambda - g.shape * std::log1p(lambda / g.rate);
          },
          [](const auto&) { return kInf; },
      },
      m);
}

/// Seeded generator stream. Streams are std::mt19937_64 engines keyed by
/// std::seed_seq over (seed, stream_index), so any (seed, stream) pair
/// replays bit-for-bit and distinct indices give decorrelated sequences.
class RngStream {
 public:
  using engine_type = std::mt19937_64;

  RngStream(std::uint64_t seed, std::uint64_t stream_index) : seed_(seed), stream_(stream_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32),
                      0x646d6564u};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_index() const noexcept { return stream_; }

  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }

  engine_type& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  engine_type engine_;
};

/// One draw from the model; advances the stream.
inline double sample(const ArmModel& m, RngStream& rng) {
  return std::visit(
      overloaded{
          [&](const Bernoulli& b) { return rng.uniform() < b.p ? 1.0 : 0.0; },
          [&](const TwoPoint& t) { return rng.uniform() < t.p ? t.x1 : t.x0; },
          [&](const UniformInterval& u) { return u.a + (u.b - u.a) * rng.uniform(); },
          [&](const ShiftedNegExponential& e) {
            return 1.0 - std::exponential_distribution<double>(e.rate)(rng.engine());
          },
          [&](const ShiftedNegGamma& g) {
            return 1.0 - std::gamma_distribution<double>(g.shape, 1.0 / g.rate)(rng.engine());
          },
          [&](const FiniteSupport& f) {
            const double u = rng.uniform();
            double c = 0.0;
            for (std::size_t k = 0; k < f.values.size(); ++k) {
              c += f.probs[k];
              if (u < c) return f.values[k];
            }
            // Rounding left u above the last partial sum.
            for (std::size_t k = f.values.size(); k-- > 0;) {
              if (f.probs[k] > 0.0) return f.values[k];
            }
            return f.values.back();
          },
      },
      m);
}

/// Exact expectations of a model in the form the dual solver consumes.
///
/// Discrete families reduce to weighted atom sums. The uniform family uses
/// antiderivatives of the three integrands. The shifted-negative families
/// integrate over E = 1 - X in log coordinates, e = exp(u), with adaptive
/// Gauss-Kronrod.
class ModelView {
 public:
  explicit ModelView(ArmModel model) : model_(std::move(model)) {
    validate(model_);
    atoms_ = discrete_atoms(model_);
    mean_ = dmed::mean(model_);
  }

  const ArmModel& model() const noexcept { return model_; }
  double mean() const noexcept { return mean_; }

  double expect_log(double nu, double mu) const {
    if (nu == 0.0) return 0.0;
    if (atoms_) return atoms_->expect_log(nu, mu);
    if (const auto* u = std::get_if<UniformInterval>(&model_)) return uniform_log(*u, nu, mu);
    return gamma_expect(nu, mu, [](double y, double) { return std::log(y); });
  }

  double expect_ratio(double nu, double mu) const {
    if (atoms_) return atoms_->expect_ratio(nu, mu);
    if (const auto* u = std::get_if<UniformInterval>(&model_)) return uniform_ratio(*u, nu, mu, false);
    return gamma_expect(nu, mu, [](double y, double d) { return d / y; });
  }

  double expect_ratio_sq(double nu, double mu) const {
    if (atoms_) return atoms_->expect_ratio_sq(nu, mu);
    if (const auto* u = std::get_if<UniformInterval>(&model_)) return uniform_ratio(*u, nu, mu, true);
    return gamma_expect(nu, mu, [](double y, double d) { return (d / y) * (d / y); });
  }

  /// E[(1-mu)/(1-X)]; +inf when the integral diverges.
  double expect_inv_gap(double mu) const {
    if (atoms_) return atoms_->expect_inv_gap(mu);
    if (const auto* u = std::get_if<UniformInterval>(&model_)) {
      if (u->b >= 1.0) return kInf;
      return (1.0 - mu) * std::log((1.0 - u->a) / (1.0 - u->b)) / (u->b - u->a);
    }
    // E[1/G] = rate/(shape-1) for shape > 1 and diverges otherwise.
    const auto [shape, rate] = gamma_params();
    if (shape <= 1.0) return kInf;
    return (1.0 - mu) * rate / (shape - 1.0);
  }

 private:
  std::pair<double, double> gamma_params() const {
    if (const auto* e = std::get_if<ShiftedNegExponential>(&model_)) return {1.0, e->rate};
    const auto& g = std::get<ShiftedNegGamma>(model_);
    return {g.shape, g.rate};
  }

  // E[h(Y, X-mu)] with Y = 1-(X-mu)nu = c + nu*G, c = 1-(1-mu)nu, G ~ Gamma.
  template <typename H>
  double gamma_expect(double nu, double mu, H h) const {
    const auto [shape, rate] = gamma_params();
    const double c = 1.0 - (1.0 - mu) * nu;
    const double log_norm = std::lgamma(shape);
    auto integrand = [&, shape = shape, rate = rate](double u) {
      const double e = std::exp(u);
      const double log_w = shape * std::log(rate * e) - rate * e - log_norm;
      const double w = std::exp(log_w);
      if (w == 0.0) return 0.0;
      return w * h(c + nu * e, (1.0 - mu) - e);
    };
    const double u_scale = std::log(1.0 / rate);
    const double u_kink = (c > 0.0 && nu > 0.0) ? std::log(c / nu) : u_scale - 700.0 / shape;
    const double lo_pad = 40.0 + std::max(0.0, -std::log(std::max(c, 1e-300)));
    const double u_lo = std::min(u_scale, u_kink) - lo_pad / shape;
    const double u_hi = std::log((shape + 60.0 + 10.0 * std::sqrt(shape)) / rate);
    const double mid = std::clamp(u_kink, u_lo, u_hi);
    return quad::integrate(integrand, u_lo, mid) + quad::integrate(integrand, mid, u_hi);
  }

  // Y ranges linearly over [y_b, y_a] as X ranges over [a, b].
  static double uniform_log(const UniformInterval& u, double nu, double mu) {
    const double ya = 1.0 - (u.a - mu) * nu;
    const double yb = 1.0 - (u.b - mu) * nu;
    const double w = ya - yb;
    if (w <= 0.05 * yb) {
      return quad::gauss_legendre([&](double x) { return std::log(1.0 - (x - mu) * nu); }, u.a, u.b) /
             (u.b - u.a);
    }
    auto anti = [](double y) { return y > 0.0 ? y * std::log(y) - y : 0.0; };
    return (anti(ya) - anti(yb)) / w;
  }

  static double uniform_ratio(const UniformInterval& u, double nu, double mu, bool squared) {
    const double ya = 1.0 - (u.a - mu) * nu;
    const double yb = 1.0 - (u.b - mu) * nu;
    const double w = ya - yb;
    if (w <= 0.05 * yb) {
      auto f = [&](double x) {
        const double q = (x - mu) / (1.0 - (x - mu) * nu);
        return squared ? q * q : q;
      };
      return quad::gauss_legendre(f, u.a, u.b) / (u.b - u.a);
    }
    if (yb <= 0.0) return squared ? kInf : -kInf;
    // (X-mu)/Y = (1-Y)/(nu*Y).
    const double inv = std::log1p(w / yb) / w;
    if (!squared) return (inv - 1.0) / nu;
    const double inv_sq = 1.0 / (ya * yb);
    return (inv_sq - 2.0 * inv + 1.0) / (nu * nu);
  }

  ArmModel model_;
  std::optional<EmpiricalDist> atoms_;
  double mean_ = 0.0;
};

inline ModelView model_view(const ArmModel& m) { return ModelView(m); }

}  // namespace dmed
