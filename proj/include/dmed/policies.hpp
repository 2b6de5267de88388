#pragma once

// DMED and comparison baselines behind a select/update interface.
// Arms are zero-based here; user-facing files number them from 1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dmed/arm_models.hpp"
#include "dmed/divergence.hpp"
#include "dmed/empirical_dist.hpp"
#include "dmed/errors.hpp"

namespace dmed {

/// Index values and list memberships at the time of a decision.
struct PolicyDiagnostics {
  std::vector<double> empirical_means;
  std::vector<std::size_t> current;    // L_C
  std::vector<std::size_t> remaining;  // L_R
  std::vector<std::size_t> next;       // L_N
};

struct PolicyDecision {
  std::size_t arm = 0;
  std::optional<PolicyDiagnostics> diagnostics;
};

class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  virtual std::size_t arm_count() const = 0;
  virtual PolicyDecision select() = 0;
  /// Must be called once per select() with the selected arm.
  virtual void update(std::size_t arm, double reward) = 0;
  virtual const std::vector<std::uint64_t>& pulls() const = 0;
};

/// J'_{n,j}: (1 - r) T_j D_inf(F_j, mu*) <= log n.
inline bool dmed_admits(std::uint64_t pulls, double dinf_value, std::uint64_t n, double r) {
  return (1.0 - r) * static_cast<double>(pulls) * dinf_value <= std::log(static_cast<double>(n));
}

/// Deterministic Minimum Empirical Divergence policy.
///
/// Arms in the current list L_C are pulled in ascending order. After every
/// pull, each arm j outside L_R (already pulled this pass) that satisfies
/// J'_{n,j} joins L_N. When the pass over L_C ends, L_C and L_R become L_N
/// and L_N is cleared. The first pass over L_C = {all arms} is the
/// pull-each-arm-once initialization; J' is only evaluated once every arm
/// has a sample.
class DmedPolicy final : public Policy {
 public:
  /// Largest value the empirical best mean is clamped to before D_inf.
  static constexpr double kMuStarCap = 1.0 - 1e-9;

  DmedPolicy(std::size_t arms, double r) : r_(r), dists_(arms), pulls_(arms, 0), remaining_(arms, true),
                                          next_(arms, false), nu_hint_(arms, 0.0) {
    if (arms < 2) throw PolicyError("DMED needs at least 2 arms");
    if (!(r > 0.0 && r < 1.0)) throw PolicyError("DMED parameter r must lie in (0,1)");
    for (std::size_t k = 0; k < arms; ++k) current_.push_back(k);
  }

  std::string name() const override { return "dmed"; }
  std::size_t arm_count() const override { return dists_.size(); }
  const std::vector<std::uint64_t>& pulls() const override { return pulls_; }

  double r() const noexcept { return r_; }
  std::uint64_t rounds() const noexcept { return n_; }
  std::uint64_t passes_completed() const noexcept { return passes_; }
  const EmpiricalDist& empirical(std::size_t arm) const { return dists_.at(arm); }

  const std::vector<std::size_t>& current_list() const noexcept { return current_; }
  std::vector<std::size_t> remaining_list() const { return members(remaining_); }
  std::vector<std::size_t> next_list() const { return members(next_); }

  PolicyDecision select() override {
    pending_ = current_[cursor_];
    return {*pending_, std::nullopt};
  }

  PolicyDiagnostics diagnostics() const {
    PolicyDiagnostics d;
    for (const auto& e : dists_) d.empirical_means.push_back(e.empty() ? std::numeric_limits<double>::quiet_NaN() : e.mean());
    d.current = current_;
    d.remaining = remaining_list();
    d.next = next_list();
    return d;
  }

  void update(std::size_t arm, double reward) override {
    if (!pending_ || *pending_ != arm) throw PolicyError("DMED update for an arm that was not selected");
    pending_.reset();
    ++n_;
    dists_[arm].push(reward);
    ++pulls_[arm];
    remaining_[arm] = false;

    if (n_ >= dists_.size() && all_sampled()) admit_arms();

    if (++cursor_ == current_.size()) end_pass();
  }

 private:
  static std::vector<std::size_t> members(const std::vector<bool>& flags) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < flags.size(); ++k) {
      if (flags[k]) out.push_back(k);
    }
    return out;
  }

  bool all_sampled() const {
    return std::all_of(pulls_.begin(), pulls_.end(), [](std::uint64_t t) { return t > 0; });
  }

  void admit_arms() {
    double mu_star = -kInf;
    for (const auto& e : dists_) mu_star = std::max(mu_star, e.mean());
    mu_star = std::min(mu_star, kMuStarCap);
    const double log_n = std::log(static_cast<double>(n_));
    for (std::size_t j = 0; j < dists_.size(); ++j) {
      if (remaining_[j] || next_[j]) continue;
      const auto& fj = dists_[j];
      if (fj.mean() >= mu_star) {
        next_[j] = true;
        continue;
      }
      const double scale = (1.0 - r_) * static_cast<double>(pulls_[j]);
      // L at any feasible nu lower-bounds D_inf; a cheap rejection first.
      auto& hint = nu_hint_[j];
      if (hint > 0.0 && hint < 1.0 / (1.0 - mu_star)) {
        const double lower = fj.expect_log(hint, mu_star);
        if (scale * lower > log_n) continue;
      }
      const DualSolution sol = solve_nu_star(fj, mu_star);
      hint = sol.nu_star;
      if (scale * sol.dinf <= log_n) next_[j] = true;
    }
  }

  void end_pass() {
    current_ = members(next_);
    remaining_ = next_;
    std::fill(next_.begin(), next_.end(), false);
    cursor_ = 0;
    ++passes_;
    if (current_.empty()) throw PolicyError("DMED liveness violated: empty arm list after a pass");
  }

  double r_;
  std::vector<EmpiricalDist> dists_;
  std::vector<std::uint64_t> pulls_;
  std::vector<bool> remaining_;
  std::vector<bool> next_;
  std::vector<std::size_t> current_;
  std::vector<double> nu_hint_;
  std::size_t cursor_ = 0;
  std::uint64_t n_ = 0;
  std::uint64_t passes_ = 0;
  std::optional<std::size_t> pending_;
};

namespace detail {

/// Running sums shared by the index baselines.
class ArmTallies {
 public:
  explicit ArmTallies(std::size_t arms) : sums_(arms, 0.0), pulls_(arms, 0) {}

  void add(std::size_t arm, double reward) {
    sums_[arm] += reward;
    ++pulls_[arm];
    ++n_;
  }
  double mean(std::size_t arm) const { return sums_[arm] / static_cast<double>(pulls_[arm]); }
  std::optional<std::size_t> first_unpulled() const {
    for (std::size_t k = 0; k < pulls_.size(); ++k) {
      if (pulls_[k] == 0) return k;
    }
    return std::nullopt;
  }
  std::size_t best_mean_arm() const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < pulls_.size(); ++k) {
      if (mean(k) > mean(best)) best = k;
    }
    return best;
  }
  const std::vector<std::uint64_t>& pulls() const { return pulls_; }
  std::uint64_t n() const { return n_; }

 private:
  std::vector<double> sums_;
  std::vector<std::uint64_t> pulls_;
  std::uint64_t n_ = 0;
};

}  // namespace detail

/// UCB1: mean + sqrt(2 log n / T_i), lowest index on ties. The confidence
/// width assumes rewards in [0,1]; with rewards unbounded below it is only a
/// heuristic.
class Ucb1Policy final : public Policy {
 public:
  explicit Ucb1Policy(std::size_t arms) : tallies_(arms) {
    if (arms < 2) throw PolicyError("UCB1 needs at least 2 arms");
  }

  std::string name() const override { return "ucb1"; }
  std::size_t arm_count() const override { return tallies_.pulls().size(); }
  const std::vector<std::uint64_t>& pulls() const override { return tallies_.pulls(); }

  double index(std::size_t arm) const {
    const double t = static_cast<double>(tallies_.pulls()[arm]);
    return tallies_.mean(arm) + std::sqrt(2.0 * std::log(static_cast<double>(tallies_.n())) / t);
  }

  PolicyDecision select() override {
    if (auto k = tallies_.first_unpulled()) {
      pending_ = *k;
      return {*k, std::nullopt};
    }
    std::size_t best = 0;
    double best_index = index(0);
    for (std::size_t k = 1; k < arm_count(); ++k) {
      const double v = index(k);
      if (v > best_index) {
        best_index = v;
        best = k;
      }
    }
    pending_ = best;
    return {best, std::nullopt};
  }

  void update(std::size_t arm, double reward) override {
    if (!pending_ || *pending_ != arm) throw PolicyError("UCB1 update for an arm that was not selected");
    pending_.reset();
    tallies_.add(arm, reward);
  }

 private:
  detail::ArmTallies tallies_;
  std::optional<std::size_t> pending_;
};

/// Epsilon-greedy: one pull per arm, then a uniformly random arm with
/// probability epsilon and the best empirical mean otherwise.
class EpsilonGreedyPolicy final : public Policy {
 public:
  EpsilonGreedyPolicy(std::size_t arms, double epsilon, RngStream rng)
      : tallies_(arms), epsilon_(epsilon), rng_(std::move(rng)) {
    if (arms < 2) throw PolicyError("epsilon-greedy needs at least 2 arms");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw PolicyError("epsilon must lie in [0,1]");
  }

  std::string name() const override { return "egreedy"; }
  std::size_t arm_count() const override { return tallies_.pulls().size(); }
  const std::vector<std::uint64_t>& pulls() const override { return tallies_.pulls(); }

  PolicyDecision select() override {
    if (pending_) return {*pending_, std::nullopt};
    std::size_t arm = 0;
    if (auto k = tallies_.first_unpulled()) {
      arm = *k;
    } else if (rng_.uniform() < epsilon_) {
      arm = std::min(arm_count() - 1, static_cast<std::size_t>(rng_.uniform() * arm_count()));
    } else {
      arm = tallies_.best_mean_arm();
    }
    pending_ = arm;
    return {arm, std::nullopt};
  }

  void update(std::size_t arm, double reward) override {
    if (!pending_ || *pending_ != arm) throw PolicyError("epsilon-greedy update for an arm that was not selected");
    pending_.reset();
    tallies_.add(arm, reward);
  }

 private:
  detail::ArmTallies tallies_;
  double epsilon_;
  RngStream rng_;
  std::optional<std::size_t> pending_;
};

/// Policy name plus numeric parameters, as read from a config document.
struct PolicySpec {
  std::string name = "dmed";
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

inline constexpr double kDefaultDmedR = 0.1;
inline constexpr double kDefaultGreedyEpsilon = 0.1;

inline std::unique_ptr<Policy> make_policy(const PolicySpec& spec, std::size_t arms, RngStream policy_rng) {
  if (spec.name == "dmed") return std::make_unique<DmedPolicy>(arms, spec.param("r", kDefaultDmedR));
  if (spec.name == "ucb1") return std::make_unique<Ucb1Policy>(arms);
  if (spec.name == "egreedy") {
    return std::make_unique<EpsilonGreedyPolicy>(arms, spec.param("epsilon", kDefaultGreedyEpsilon),
                                                 std::move(policy_rng));
  }
  throw PolicyError("unknown policy '" + spec.name + "'");
}

}  // namespace dmed
