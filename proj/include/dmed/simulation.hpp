#pragma once

// Seeded regret replications and Monte Carlo checks of the deviation bounds.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dmed/arm_models.hpp"
#include "dmed/deviation_bounds.hpp"
#include "dmed/divergence.hpp"
#include "dmed/policies.hpp"

namespace dmed {

struct ExperimentConfig {
  std::vector<ArmModel> arms;
  PolicySpec policy;
  std::uint64_t horizon = 0;
  std::uint64_t replications = 1;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> checkpoints;  // empty: just the horizon

  std::vector<std::uint64_t> effective_checkpoints() const {
    return checkpoints.empty() ? std::vector<std::uint64_t>{horizon} : checkpoints;
  }
};

inline void validate(const ExperimentConfig& c) {
  if (c.arms.size() < 2) throw DomainError("experiment needs at least 2 arms");
  for (const auto& m : c.arms) validate(m);
  if (c.horizon < c.arms.size()) throw DomainError("horizon must be at least the arm count");
  if (c.replications < 1) throw DomainError("replications must be at least 1");
  const auto cps = c.effective_checkpoints();
  for (std::size_t k = 0; k < cps.size(); ++k) {
    if (cps[k] < 1 || cps[k] > c.horizon) throw DomainError("checkpoint outside [1, horizon]");
    if (k > 0 && cps[k] <= cps[k - 1]) throw DomainError("checkpoints must be strictly increasing");
  }
}

/// RNG stream layout: (K+1) streams per replication, one per arm and one
/// for policy-internal randomness.
inline std::uint64_t arm_stream_index(std::uint64_t replication, std::size_t arms, std::size_t arm) {
  return replication * (arms + 1) + arm;
}
inline std::uint64_t policy_stream_index(std::uint64_t replication, std::size_t arms) {
  return replication * (arms + 1) + arms;
}

struct CheckpointRow {
  std::uint64_t n = 0;
  double pseudo_regret = 0.0;
  std::vector<std::uint64_t> pulls;
};

struct RegretRecord {
  std::uint64_t replication = 0;
  std::vector<CheckpointRow> rows;
};

/// Sum over suboptimal arms of (mu* - mu_i) T_i.
inline double pseudo_regret(std::span<const double> means, std::span<const std::uint64_t> pulls) {
  const double best = *std::max_element(means.begin(), means.end());
  double s = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) s += (best - means[k]) * static_cast<double>(pulls[k]);
  return s;
}

inline RegretRecord run_replication(const ExperimentConfig& config, std::uint64_t replication) {
  validate(config);
  const std::size_t K = config.arms.size();
  std::vector<RngStream> streams;
  streams.reserve(K);
  for (std::size_t k = 0; k < K; ++k) streams.emplace_back(config.seed, arm_stream_index(replication, K, k));
  auto policy = make_policy(config.policy, K, RngStream(config.seed, policy_stream_index(replication, K)));

  std::vector<double> means;
  for (const auto& m : config.arms) means.push_back(mean(m));

  RegretRecord rec;
  rec.replication = replication;
  const auto cps = config.effective_checkpoints();
  std::size_t next_cp = 0;
  for (std::uint64_t t = 1; t <= config.horizon; ++t) {
    const std::size_t arm = policy->select().arm;
    policy->update(arm, sample(config.arms[arm], streams[arm]));
    if (next_cp < cps.size() && cps[next_cp] == t) {
      const auto& pulls = policy->pulls();
      rec.rows.push_back({t, pseudo_regret(means, pulls), pulls});
      ++next_cp;
    }
  }
  return rec;
}

struct SummaryStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for one replication
  double min = 0.0;
  double max = 0.0;
};

inline SummaryStats summarize(std::span<const double> xs) {
  SummaryStats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  s.min = xs.front();
  s.max = xs.front();
  for (double x : xs) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct CheckpointAggregate {
  std::uint64_t n = 0;
  SummaryStats pseudo_regret;
  std::vector<SummaryStats> pulls;
};

struct ExperimentResult {
  std::vector<RegretRecord> records;  // ordered by replication index
  std::vector<CheckpointAggregate> aggregates;
};

/// Runs `count` independent jobs on up to `workers` threads.
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k; !failed && (k = next.fetch_add(1)) < count;) {
        try {
          job(k);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// All replications plus per-checkpoint aggregates. Aggregation walks the
/// records in replication order, so results do not depend on `workers`.
inline ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers = 1) {
  validate(config);
  ExperimentResult res;
  res.records.resize(config.replications);
  parallel_for(config.replications, workers,
               [&](std::size_t r) { res.records[r] = run_replication(config, r); });

  const auto cps = config.effective_checkpoints();
  const std::size_t K = config.arms.size();
  for (std::size_t c = 0; c < cps.size(); ++c) {
    CheckpointAggregate agg;
    agg.n = cps[c];
    std::vector<double> vals;
    for (const auto& rec : res.records) vals.push_back(rec.rows[c].pseudo_regret);
    agg.pseudo_regret = summarize(vals);
    for (std::size_t k = 0; k < K; ++k) {
      vals.clear();
      for (const auto& rec : res.records) vals.push_back(static_cast<double>(rec.rows[c].pulls[k]));
      agg.pulls.push_back(summarize(vals));
    }
    res.aggregates.push_back(std::move(agg));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Deviation-bound verifiers

enum class DeviationKind { lower, upper };

struct DeviationTrial {
  DeviationKind kind = DeviationKind::lower;
  std::string model;
  double mu = 0.0;
  std::uint64_t t = 0;
  double threshold = 0.0;  // v (lower) or u (upper)
  double empirical_freq = 0.0;
  double bound = 0.0;
  std::uint64_t trials = 0;

  double standard_error() const { return std::sqrt(bound * (1.0 - bound) / static_cast<double>(trials)); }
  /// bound + 3 standard errors - frequency; nonnegative when the cell passes.
  double slack() const { return bound + 3.0 * standard_error() - empirical_freq; }
  bool pass() const { return slack() >= 0.0; }
};

inline constexpr std::uint64_t kMinTrials = 10'000;
inline constexpr std::uint64_t kMaxTrials = 1'000'000;
inline constexpr std::uint64_t kMaxSampleSize = 10'000;

struct VerifierOptions {
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

namespace detail {

inline constexpr std::uint64_t kTrialBlock = 1000;

inline void check_verifier_sizes(std::span<const std::uint64_t> ts, std::uint64_t trials) {
  if (trials < kMinTrials || trials > kMaxTrials) throw DomainError("trial count must lie in [1e4, 1e6]");
  for (auto t : ts) {
    if (t < 1 || t > kMaxSampleSize) throw DomainError("sample size t must lie in [1, 1e4]");
  }
}

// Applies `visit(dinf_hat, mean_hat)` to `trials` independent t-sample
// empirical distributions. Trials are grouped in blocks of kTrialBlock, each
// block with its own stream, so the outcome does not depend on `workers`.
// Returns per-block counts of the events selected by `events`.
template <typename Events>
std::vector<std::uint64_t> count_events(const ArmModel& model, double mu, std::uint64_t t,
                                        std::size_t cell_index, std::size_t event_count,
                                        const VerifierOptions& opt, Events events) {
  const std::uint64_t blocks = (opt.trials + kTrialBlock - 1) / kTrialBlock;
  std::vector<std::vector<std::uint64_t>> per_block(blocks, std::vector<std::uint64_t>(event_count, 0));
  parallel_for(blocks, opt.workers, [&](std::size_t b) {
    RngStream rng(opt.seed, (static_cast<std::uint64_t>(cell_index) << 32) + b);
    const std::uint64_t first = b * kTrialBlock;
    const std::uint64_t last = std::min(opt.trials, first + kTrialBlock);
    for (std::uint64_t trial = first; trial < last; ++trial) {
      EmpiricalDist f;
      for (std::uint64_t s = 0; s < t; ++s) f.push(sample(model, rng));
      events(f, dinf(f, mu), per_block[b]);
    }
  });
  std::vector<std::uint64_t> totals(event_count, 0);
  for (const auto& blk : per_block) {
    for (std::size_t e = 0; e < event_count; ++e) totals[e] += blk[e];
  }
  return totals;
}

}  // namespace detail

/// Estimates P[D_inf(F_t, mu) <= D_inf(F, mu) - v] for every (t, v) and
/// pairs it with lower_dev_bound. All thresholds for one t share a trial batch.
inline std::vector<DeviationTrial> verify_lower_deviation(const ArmModel& model, double mu,
                                                          std::span<const std::uint64_t> ts,
                                                          std::span<const double> vs, const VerifierOptions& opt) {
  validate(model);
  const double m = mean(model);
  if (!(mu > m && mu < 1.0)) throw DomainError("verify_lower_deviation requires mean < mu < 1");
  detail::check_verifier_sizes(ts, opt.trials);
  for (double v : vs) {
    if (!(v > 0.0)) throw DomainError("v must be positive");
  }
  const double d_true = dinf(model_view(model), mu);

  std::vector<DeviationTrial> out;
  for (std::size_t ti = 0; ti < ts.size(); ++ti) {
    const auto counts = detail::count_events(
        model, mu, ts[ti], ti, vs.size(), opt, [&](const EmpiricalDist&, double d_hat, auto& tally) {
          for (std::size_t k = 0; k < vs.size(); ++k) {
            if (d_hat <= d_true - vs[k]) ++tally[k];
          }
        });
    for (std::size_t k = 0; k < vs.size(); ++k) {
      DeviationTrial cell;
      cell.kind = DeviationKind::lower;
      cell.model = family_name(model);
      cell.mu = mu;
      cell.t = ts[ti];
      cell.threshold = vs[k];
      cell.trials = opt.trials;
      cell.empirical_freq = static_cast<double>(counts[k]) / static_cast<double>(opt.trials);
      cell.bound = lower_dev_bound(ts[ti], vs[k], m, mu);
      out.push_back(cell);
    }
  }
  return out;
}

/// Estimates P[D_inf(F_t, mu) >= u, mean(F_t) <= mu] for every (t, u) and
/// pairs it with upper_dev_bound at Lambda*(mu).
inline std::vector<DeviationTrial> verify_upper_deviation(const ArmModel& model, double mu,
                                                          std::span<const std::uint64_t> ts,
                                                          std::span<const double> us, const VerifierOptions& opt) {
  validate(model);
  const double m = mean(model);
  if (!(mu < m)) throw DomainError("verify_upper_deviation requires mu < mean");
  detail::check_verifier_sizes(ts, opt.trials);
  for (double u : us) {
    if (!(u > 0.0)) throw DomainError("u must exceed D_inf(F, mu) = 0");
  }
  const double rate = legendre(model, mu).value;

  std::vector<DeviationTrial> out;
  for (std::size_t ti = 0; ti < ts.size(); ++ti) {
    const auto counts = detail::count_events(
        model, mu, ts[ti], ts.size() + ti, us.size(), opt,
        [&](const EmpiricalDist& f, double d_hat, auto& tally) {
          if (f.mean() > mu) return;
          for (std::size_t k = 0; k < us.size(); ++k) {
            if (d_hat >= us[k]) ++tally[k];
          }
        });
    for (std::size_t k = 0; k < us.size(); ++k) {
      DeviationTrial cell;
      cell.kind = DeviationKind::upper;
      cell.model = family_name(model);
      cell.mu = mu;
      cell.t = ts[ti];
      cell.threshold = us[k];
      cell.trials = opt.trials;
      cell.empirical_freq = static_cast<double>(counts[k]) / static_cast<double>(opt.trials);
      cell.bound = upper_dev_bound(ts[ti], us[k], rate);
      out.push_back(cell);
    }
  }
  return out;
}

}  // namespace dmed
