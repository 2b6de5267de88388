#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dmed/errors.hpp"

namespace dmed {

/// One support point of a discrete distribution.
struct Atom {
  double value;
  double weight;
};

/// Weighted atom list over values <= 1.
///
/// Duplicate values (same bit pattern) are merged into a single atom, so a
/// Bernoulli stream keeps at most two atoms no matter how many samples were
/// pushed. Atoms are kept in order of first appearance, which makes every
/// weighted sum below a deterministic function of the push sequence.
class EmpiricalDist {
 public:
  EmpiricalDist() = default;

  /// Builds from raw samples, each with unit weight.
  static EmpiricalDist from_samples(std::span<const double> samples) {
    EmpiricalDist d;
    for (double x : samples) d.push(x);
    return d;
  }

  /// Builds from (value, weight) pairs; weights need not be normalized.
  static EmpiricalDist from_atoms(std::span<const Atom> atoms) {
    EmpiricalDist d;
    for (const Atom& a : atoms) d.add(a.value, a.weight);
    return d;
  }

  void push(double x) { add(x, 1.0); }

  void add(double x, double w) {
    if (!(x <= 1.0)) throw DomainError("EmpiricalDist: value " + std::to_string(x) + " exceeds 1");
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("EmpiricalDist: weight must be positive");
    // +0.0 and -0.0 share one atom.
    if (x == 0.0) x = 0.0;
    const auto key = std::bit_cast<std::uint64_t>(x);
    auto [it, inserted] = index_.try_emplace(key, atoms_.size());
    if (inserted) {
      atoms_.push_back({x, w});
    } else {
      atoms_[it->second].weight += w;
    }
    total_weight_ += w;
    weighted_sum_ += w * x;
  }

  bool empty() const noexcept { return atoms_.empty(); }
  std::size_t size() const noexcept { return atoms_.size(); }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  double total_weight() const noexcept { return total_weight_; }

  double mean() const {
    require_nonempty();
    return weighted_sum_ / total_weight_;
  }

  double min_value() const {
    require_nonempty();
    double m = atoms_.front().value;
    for (const Atom& a : atoms_) m = std::min(m, a.value);
    return m;
  }

  /// E[log(1 - (X-mu) nu)]; -inf when an atom sits where the argument is 0.
  double expect_log(double nu, double mu) const {
    require_nonempty();
    double s = 0.0;
    for (const Atom& a : atoms_) {
      const double y = 1.0 - (a.value - mu) * nu;
      if (y <= 0.0) return -std::numeric_limits<double>::infinity();
      s += a.weight * std::log(y);
    }
    return s / total_weight_;
  }

  /// E[(X-mu) / (1 - (X-mu) nu)].
  double expect_ratio(double nu, double mu) const {
    require_nonempty();
    double s = 0.0;
    for (const Atom& a : atoms_) {
      const double d = a.value - mu;
      s += a.weight * d / (1.0 - d * nu);
    }
    return s / total_weight_;
  }

  /// E[(X-mu)^2 / (1 - (X-mu) nu)^2].
  double expect_ratio_sq(double nu, double mu) const {
    require_nonempty();
    double s = 0.0;
    for (const Atom& a : atoms_) {
      const double q = (a.value - mu) / (1.0 - (a.value - mu) * nu);
      s += a.weight * q * q;
    }
    return s / total_weight_;
  }

  /// E[(1-mu) / (1-X)]; +inf if there is mass at 1.
  double expect_inv_gap(double mu) const {
    require_nonempty();
    double s = 0.0;
    for (const Atom& a : atoms_) {
      if (a.value >= 1.0) return std::numeric_limits<double>::infinity();
      s += a.weight / (1.0 - a.value);
    }
    return (1.0 - mu) * s / total_weight_;
  }

 private:
  void require_nonempty() const {
    if (atoms_.empty()) throw DomainError("EmpiricalDist: no samples");
  }

  std::vector<Atom> atoms_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  double total_weight_ = 0.0;
  double weighted_sum_ = 0.0;
};

}  // namespace dmed
