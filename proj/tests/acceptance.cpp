// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dmed/cli.hpp"
#include "dmed/dmed.hpp"

namespace {

using namespace dmed;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome a1_primal_dual() {
  RngStream rng(101, 0);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto in = verify::random_instance(rng);
    worst = std::max(worst, std::abs(dinf(in.dist, in.mu) - oracle::dinf_primal_oracle(in.dist, in.mu)));
  }
  return {worst <= 1e-4, fmt("200 instances, max |dual - primal| = %.3e", worst)};
}

Outcome a2_bernoulli_closed_form() {
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double p = 0.01 + 0.045 * i;
    for (int j = 0; j < 20; ++j) {
      const double mu = p + (0.99 - p) * (j + 1) / 20.0;
      const double exact = p * std::log(p / mu) + (1 - p) * std::log((1 - p) / (1 - mu));
      worst = std::max(worst, std::abs(dinf(model_view(Bernoulli{p}), mu) - exact));
    }
  }
  return {worst <= 1e-9, fmt("20x20 grid, max error = %.3e", worst)};
}

Outcome a3_kkt() {
  RngStream rng(103, 0);
  double worst_interior = 0.0, worst_boundary = -kInf;
  int boundary = 0;
  for (int k = 0; k < 500; ++k) {
    const auto in = verify::random_instance(rng);
    const auto s = solve_nu_star(in.dist, in.mu);
    if (s.at_boundary) {
      ++boundary;
      worst_boundary = std::max(worst_boundary, in.dist.expect_inv_gap(in.mu));
    } else {
      worst_interior = std::max(worst_interior, std::abs(s.nu_star * in.dist.expect_ratio(s.nu_star, in.mu)));
    }
  }
  const bool ok = worst_interior <= 1e-8 && worst_boundary <= 1 + 1e-8;
  return {ok, fmt("500 instances (%.0f boundary), interior max |E[1/Y]-1| = %.3e, boundary max E[(1-mu)/(1-X)] = %.6f",
                  boundary, worst_interior, boundary > 0 ? worst_boundary : 0.0)};
}

Outcome a4_derivative() {
  RngStream rng(104, 0);
  double worst = 0.0;
  const double h = 1e-5;
  for (int k = 0; k < 100; ++k) {
    const auto in = verify::random_instance(rng, 8, -5.0, 0.99, 0.05);
    const double fd = (dinf(in.dist, in.mu + h) - dinf(in.dist, in.mu - h)) / (2 * h);
    worst = std::max(worst, std::abs(fd - dinf_deriv_mu(in.dist, in.mu)));
  }
  return {worst <= 1e-3, fmt("100 instances, max |fd - nu*| = %.3e", worst)};
}

double mean_pulls_of_second_arm(const ExperimentConfig& cfg, unsigned workers) {
  return run_experiment(cfg, workers).aggregates.back().pulls[1].mean;
}

Outcome bound_run(std::vector<ArmModel> arms, std::uint64_t n, std::uint64_t seed, bool check_total) {
  ExperimentConfig cfg;
  cfg.arms = arms;
  cfg.policy = PolicySpec{"dmed", {{"r", 0.1}}};
  cfg.horizon = n;
  cfg.replications = 100;
  cfg.seed = seed;
  const double t2 = mean_pulls_of_second_arm(cfg, cli::default_workers());
  const auto best = optimize_bound_params(arms, 1, n, 0.1);
  const double log_n = std::log(static_cast<double>(n));
  const double per_log = t2 / log_n;
  const double rhs = best.report.log_coeff + best.report.constant_C / log_n;
  bool ok = std::isfinite(per_log) && per_log <= rhs;
  if (check_total) ok = ok && t2 <= best.report.total();
  return {ok, fmt("mean T_2 = %.2f, T_2/log n = %.3f <= %.3f", t2, per_log, rhs) +
                  fmt(" (eps = %.3f, delta = %.3g, bound = %.1f)", best.epsilon, best.delta, best.report.total())};
}

Outcome a5_bernoulli_regret() { return bound_run({Bernoulli{0.7}, Bernoulli{0.5}}, 100'000, 105, true); }

Outcome a6_semi_bounded() { return bound_run({Bernoulli{0.6}, ShiftedNegExponential{2.0}}, 10'000, 106, false); }

Outcome ldp_cells(const std::vector<DeviationTrial>& cells) {
  bool ok = true;
  double min_slack = kInf;
  for (const auto& c : cells) {
    ok = ok && c.pass();
    min_slack = std::min(min_slack, c.slack());
  }
  return {ok, fmt("%.0f cells x 1e5 trials, min slack = %.3e", static_cast<double>(cells.size()), min_slack)};
}

Outcome a7_lower_deviation() {
  const std::vector<std::uint64_t> ts{10, 50, 200};
  const std::vector<double> vs{0.02, 0.05, 0.1};
  const VerifierOptions opt{100'000, 107, cli::default_workers()};
  auto cells = verify_lower_deviation(Bernoulli{0.5}, 0.75, ts, vs, opt);
  auto more = verify_lower_deviation(ShiftedNegExponential{1.0}, 0.5, ts, vs, opt);
  cells.insert(cells.end(), more.begin(), more.end());
  return ldp_cells(cells);
}

Outcome a8_upper_deviation() {
  const std::vector<std::uint64_t> ts{10, 50, 200};
  const std::vector<double> us{0.05, 0.2, 0.5};
  const VerifierOptions opt{100'000, 108, cli::default_workers()};
  return ldp_cells(verify_upper_deviation(Bernoulli{0.7}, 0.5, ts, us, opt));
}

Outcome a9_scale_invariance() {
  RngStream rng(109, 0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto in = verify::random_instance(rng, 8, 0.0);
    const double base = dinf(in.dist, in.mu);
    for (double a : {-5.0, -1.0, -0.1}) {
      const double img = dinf(verify::affine_image(in.dist, a), a + (1 - a) * in.mu);
      worst = std::max(worst, std::abs(img - base));
    }
  }
  return {worst <= 1e-10, fmt("100 instances x 3 maps, max difference = %.3e", worst)};
}

Outcome a10_truncation() {
  const auto f = EmpiricalDist::from_atoms(std::vector<Atom>{
      {-700.0, 0.002}, {-60.0, 0.01}, {-8.0, 0.05}, {-0.5, 0.2}, {0.3, 0.3}, {0.8, 0.4}, {1.0, 0.038}});
  const double mu = 0.6;
  const double base = dinf(f, mu);
  std::vector<double> diffs;
  for (double a : {-1.0, -10.0, -100.0, -1000.0}) diffs.push_back(std::abs(dinf(truncate_at(f, a), mu) - base));
  bool ok = diffs.back() <= 1e-6;
  for (std::size_t k = 1; k < diffs.size(); ++k) ok = ok && diffs[k] <= diffs[k - 1];
  return {ok, fmt("|diff| at a = -1, -10, -100: %.3e, %.3e, %.3e", diffs[0], diffs[1], diffs[2]) +
                  fmt(", at -1000: %.3e", diffs[3])};
}

Outcome a11_legendre() {
  double worst_zero = 0.0;
  for (const ArmModel& m : std::vector<ArmModel>{Bernoulli{0.3}, TwoPoint{-2.0, 0.5, 0.6}, UniformInterval{-1.0, 1.0},
                                                 ShiftedNegExponential{2.0}, ShiftedNegGamma{2.5, 3.0},
                                                 FiniteSupport{{-4.0, 0.25, 1.0}, {0.2, 0.5, 0.3}}}) {
    worst_zero = std::max(worst_zero, legendre(m, mean(m)).value);
  }
  const double bern = legendre(Bernoulli{0.7}, 0.5).value;
  const double expo = legendre(ShiftedNegExponential{1.0}, -1.0).value;
  const bool ok = worst_zero <= 1e-10 && std::abs(bern - 0.087177) <= 1e-6 && std::abs(expo - 0.306853) <= 1e-6;
  return {ok, fmt("max value at mean = %.3e, Bernoulli = %.6f, shifted exponential = %.6f", worst_zero, bern, expo)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"A1 primal-dual equality", a1_primal_dual},
      {"A2 Bernoulli closed form", a2_bernoulli_closed_form},
      {"A3 KKT conditions", a3_kkt},
      {"A4 derivative in mu", a4_derivative},
      {"A5 regret bound, Bernoulli 0.7/0.5", a5_bernoulli_regret},
      {"A6 semi-bounded run", a6_semi_bounded},
      {"A7 lower deviation bound", a7_lower_deviation},
      {"A8 upper deviation bound", a8_upper_deviation},
      {"A9 scale invariance", a9_scale_invariance},
      {"A10 truncation", a10_truncation},
      {"A11 Legendre transform", a11_legendre},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
