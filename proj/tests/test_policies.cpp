#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "dmed/policies.hpp"

namespace dmed {
namespace {

// Drives `policy` for `rounds` steps; arm k's rewards come from its own stream.
std::vector<std::size_t> drive(Policy& policy, const std::vector<ArmModel>& arms, std::uint64_t seed,
                               std::uint64_t rounds, const std::vector<std::size_t>& stream_of) {
  std::vector<RngStream> streams;
  for (std::size_t k = 0; k < arms.size(); ++k) streams.emplace_back(seed, stream_of[k]);
  std::vector<std::size_t> seq;
  for (std::uint64_t t = 0; t < rounds; ++t) {
    const auto arm = policy.select().arm;
    seq.push_back(arm);
    policy.update(arm, sample(arms[arm], streams[arm]));
  }
  return seq;
}

std::vector<std::size_t> identity(std::size_t k) {
  std::vector<std::size_t> v(k);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TEST(Dmed, RejectsBadParameters) {
  EXPECT_THROW(DmedPolicy(2, 0.0), PolicyError);
  EXPECT_THROW(DmedPolicy(2, 1.0), PolicyError);
  EXPECT_THROW(DmedPolicy(1, 0.1), PolicyError);
}

TEST(Dmed, InitialSweepIsAscending) {
  DmedPolicy p(5, 0.1);
  EXPECT_EQ(p.remaining_list(), identity(5));
  for (std::size_t k = 0; k < 5; ++k) {
    const auto d = p.select();
    EXPECT_EQ(d.arm, k);
    p.update(d.arm, 0.5 - 0.1 * static_cast<double>(k));
  }
  EXPECT_EQ(p.passes_completed(), 1u);
}

TEST(Dmed, ForcedTraceDropsZeroArm) {
  DmedPolicy p(2, 0.1);
  p.update(p.select().arm, 1.0);
  p.update(p.select().arm, 0.0);
  EXPECT_NEAR(dinf(p.empirical(1), DmedPolicy::kMuStarCap), 20.7232658369464, 1e-6);
  EXPECT_EQ(p.current_list(), std::vector<std::size_t>{0});
  EXPECT_EQ(p.select().arm, 0u);
}

TEST(Dmed, ForcedTraceKeepsTiedArms) {
  DmedPolicy p(2, 0.1);
  p.update(p.select().arm, 1.0);
  p.update(p.select().arm, 1.0);
  EXPECT_EQ(p.current_list(), (std::vector<std::size_t>{0, 1}));
}

TEST(Dmed, UpdateMustFollowSelect) {
  DmedPolicy p(3, 0.1);
  EXPECT_THROW(p.update(0, 0.5), PolicyError);
  const auto d = p.select();
  EXPECT_THROW(p.update(d.arm + 1, 0.5), PolicyError);
  EXPECT_NO_THROW(p.update(d.arm, 0.5));
  EXPECT_THROW(p.update(d.arm, 0.5), PolicyError);
}

TEST(Dmed, ConservationAndLivenessOverLongRun) {
  const std::vector<ArmModel> arms{Bernoulli{0.3}, TwoPoint{-1.0, 1.0, 0.7}, ShiftedNegExponential{2.0},
                                   UniformInterval{-1.0, 1.0}};
  DmedPolicy p(arms.size(), 0.1);
  std::vector<RngStream> streams;
  for (std::size_t k = 0; k < arms.size(); ++k) streams.emplace_back(17, k);
  for (std::uint64_t t = 1; t <= 20'000; ++t) {
    const auto arm = p.select().arm;
    p.update(arm, sample(arms[arm], streams[arm]));
    const auto& pulls = p.pulls();
    ASSERT_EQ(std::accumulate(pulls.begin(), pulls.end(), std::uint64_t{0}), t);
    ASSERT_EQ(p.rounds(), t);
    ASSERT_FALSE(p.current_list().empty());
  }
  // The shifted exponential (mean 0.5) is best.
  EXPECT_GT(p.pulls()[2], 15'000u);
}

TEST(Dmed, DiagnosticsMirrorLists) {
  DmedPolicy p(3, 0.2);
  auto d0 = p.diagnostics();
  EXPECT_TRUE(std::isnan(d0.empirical_means[0]));
  p.update(p.select().arm, 0.25);
  auto d1 = p.diagnostics();
  EXPECT_DOUBLE_EQ(d1.empirical_means[0], 0.25);
  EXPECT_EQ(d1.remaining, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(d1.current, identity(3));
}

TEST(Dmed, Deterministic) {
  const std::vector<ArmModel> arms{Bernoulli{0.5}, Bernoulli{0.55}, Bernoulli{0.45}};
  DmedPolicy a(3, 0.1), b(3, 0.1);
  EXPECT_EQ(drive(a, arms, 3, 5000, identity(3)), drive(b, arms, 3, 5000, identity(3)));
}

TEST(Dmed, DecisionsDependOnlyOnPerArmRewardSequences) {
  // Identity relabeling: the same per-arm reward sequences, delivered from
  // precomputed tables instead of live streams, give the same decisions.
  const std::vector<ArmModel> arms{Bernoulli{0.5}, Bernoulli{0.6}, Bernoulli{0.4}};
  const std::vector<std::size_t> streams{4, 9, 2};
  DmedPolicy a(3, 0.1);
  const auto base = drive(a, arms, 8, 3000, streams);

  std::vector<std::vector<double>> table(3);
  for (std::size_t k = 0; k < 3; ++k) {
    RngStream rng(8, streams[k]);
    for (int t = 0; t < 3000; ++t) table[k].push_back(sample(arms[k], rng));
  }
  DmedPolicy b(3, 0.1);
  std::vector<std::size_t> next(3, 0), seq;
  for (int t = 0; t < 3000; ++t) {
    const auto arm = b.select().arm;
    seq.push_back(arm);
    b.update(arm, table[arm][next[arm]++]);
  }
  EXPECT_EQ(seq, base);
}

TEST(Ucb1, InitialisationAndTies) {
  Ucb1Policy p(3);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto arm = p.select().arm;
    EXPECT_EQ(arm, k);
    p.update(arm, 0.5);
  }
  EXPECT_EQ(p.select().arm, 0u);
}

TEST(Ucb1, ConcentratesOnBestArm) {
  const std::vector<ArmModel> arms{Bernoulli{0.9}, Bernoulli{0.1}};
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Ucb1Policy p(2);
    drive(p, arms, seed, 10'000, identity(2));
    total += static_cast<double>(p.pulls()[1]);
  }
  EXPECT_LT(total / 100.0, 1000.0);
}

TEST(EpsilonGreedy, PullsEachArmThenMostlyBest) {
  const std::vector<ArmModel> arms{Bernoulli{0.2}, Bernoulli{0.8}};
  EpsilonGreedyPolicy p(2, 0.1, RngStream(1, 99));
  drive(p, arms, 1, 10'000, identity(2));
  EXPECT_GT(p.pulls()[1], 9000u);
  EXPECT_GT(p.pulls()[0], 100u);
  EXPECT_THROW(EpsilonGreedyPolicy(2, 1.5, RngStream(1, 1)), PolicyError);
}

TEST(MakePolicy, NamesAndDefaults) {
  PolicySpec spec;
  auto p = make_policy(spec, 2, RngStream(0, 0));
  EXPECT_EQ(p->name(), "dmed");
  EXPECT_DOUBLE_EQ(dynamic_cast<DmedPolicy&>(*p).r(), kDefaultDmedR);
  spec.name = "ucb1";
  EXPECT_EQ(make_policy(spec, 2, RngStream(0, 0))->name(), "ucb1");
  spec.name = "thompson";
  EXPECT_THROW(make_policy(spec, 2, RngStream(0, 0)), PolicyError);
}

}  // namespace
}  // namespace dmed
