#pragma once

// Subcommands of the dmed command-line tool. Each returns the process exit
// code: 0 success, 1 runtime or verification failure, 2 bad input.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dmed/config.hpp"
#include "dmed/deviation_bounds.hpp"
#include "dmed/divergence.hpp"
#include "dmed/simulation.hpp"
#include "dmed/verification.hpp"

namespace dmed::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kWorkersEnv = "DMED_WORKERS";

/// Worker count from DMED_WORKERS, defaulting to 1.
inline unsigned default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// 17 significant digits, '.' decimal point, no grouping.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& dir, const char* name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

inline json stats_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}, {"min", s.min}, {"max", s.max}};
}

}  // namespace detail

inline int cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                        unsigned workers, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = config::experiment_from_json(config::load_document(config_path));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const ExperimentResult res = run_experiment(cfg, workers);
    const std::size_t K = cfg.arms.size();

    auto csv = detail::open_output(out_dir, "regret.csv");
    csv << "replication,checkpoint_n,cum_pseudo_regret";
    for (std::size_t k = 1; k <= K; ++k) csv << ",T_" << k;
    csv << "\n";
    for (const auto& rec : res.records) {
      for (const auto& row : rec.rows) {
        csv << rec.replication << "," << row.n << "," << fmt_double(row.pseudo_regret);
        for (auto t : row.pulls) csv << "," << t;
        csv << "\n";
      }
    }

    json summary;
    summary["schema_version"] = config::kSchemaVersion;
    summary["version"] = kVersion;
    summary["seed"] = cfg.seed;
    summary["config"] = config::experiment_to_json(cfg);
    summary["checkpoints"] = json::array();
    for (const auto& agg : res.aggregates) {
      json c;
      c["n"] = agg.n;
      c["pseudo_regret"] = detail::stats_json(agg.pseudo_regret);
      c["pulls"] = json::array();
      for (const auto& p : agg.pulls) c["pulls"].push_back(detail::stats_json(p));
      summary["checkpoints"].push_back(std::move(c));
    }
    detail::open_output(out_dir, "summary.json") << summary.dump(2) << "\n";
    out << "wrote " << (out_dir / "regret.csv").string() << " and " << (out_dir / "summary.json").string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "simulation failed: " << e.what() << "\n";
    return 1;
  }
}

struct BoundOverrides {
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> r;
};

inline json bound_report_json(const BoundReport& rep, const char* chosen_by) {
  json j;
  j["schema_version"] = config::kSchemaVersion;
  j["arm"] = rep.arm_index + 1;
  j["n"] = rep.n;
  j["epsilon"] = rep.epsilon;
  j["delta"] = rep.delta;
  j["r"] = rep.r;
  j["parameters_chosen_by"] = chosen_by;
  j["mu_star"] = rep.mu_star;
  j["mu_prime"] = rep.mu_prime;
  j["xi"] = rep.xi;
  j["dinf_true"] = rep.dinf_true;
  j["log_coeff"] = rep.log_coeff;
  j["constant_C"] = rep.constant_C;
  j["bound"] = rep.total();
  const auto& c = rep.components;
  j["components"] = {{"u_I", c.u_I},
                     {"index_term", c.index_term},
                     {"optimal_term", c.optimal_term},
                     {"suboptimal_term", c.suboptimal_term},
                     {"min_optimal_term", c.min_optimal_term},
                     {"min_attained_by_arm", c.min_attained_by + 1}};
  auto rates = [](const std::vector<RateEntry>& v) {
    json a = json::array();
    for (const auto& e : v) a.push_back({{"arm", e.arm + 1}, {"x", e.x}, {"legendre", e.value}});
    return a;
  };
  j["legendre_at_mu_star_minus_delta"] = rates(rep.rates_at_mu_star_minus_delta);
  j["legendre_at_mu_prime_plus_delta"] = rates(rep.rates_at_mu_prime_plus_delta);
  return j;
}

/// `arm` is one-based.
inline int cmd_bound(const std::filesystem::path& config_path, std::size_t arm, std::uint64_t n,
                     const BoundOverrides& ov, std::ostream& out, std::ostream& err) {
  std::vector<ArmModel> truth;
  double r = kDefaultDmedR;
  try {
    const json doc = config::load_document(config_path);
    truth = config::arms_from_json(doc);
    if (doc.contains("policy")) {
      const PolicySpec p = config::policy_from_json(doc["policy"], "policy");
      if (p.name == "dmed") r = p.param("r", r);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  if (ov.r) r = *ov.r;
  if (arm < 1 || arm > truth.size()) {
    err << "infeasible parameters: arm index " << arm << " out of range\n";
    return 2;
  }
  try {
    if (ov.epsilon && ov.delta) {
      const auto rep = regret_bound(truth, arm - 1, n, *ov.epsilon, *ov.delta, r);
      out << bound_report_json(rep, "override").dump(2) << "\n";
      return 0;
    }
    BoundGrid grid;
    if (ov.epsilon || ov.delta) {
      std::vector<double> means;
      for (const auto& m : truth) means.push_back(mean(m));
      const double mu_star = *std::max_element(means.begin(), means.end());
      double mu_prime = -kInf;
      for (double m : means) {
        if (m != mu_star) mu_prime = std::max(mu_prime, m);
      }
      grid = BoundGrid::defaults(mu_star - mu_prime);
      if (ov.epsilon) grid.epsilons = {*ov.epsilon};
      if (ov.delta) grid.deltas = {*ov.delta};
    }
    const auto best = optimize_bound_params(truth, arm - 1, n, r, grid);
    out << bound_report_json(best.report, "optimizer").dump(2) << "\n";
    return 0;
  } catch (const InfeasibleParameters& e) {
    err << "infeasible parameters: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "bound failed: " << e.what() << "\n";
    return 1;
  }
}

inline int cmd_verify_dinf(std::uint64_t trials, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  if (trials < 1) {
    err << "trials must be at least 1\n";
    return 2;
  }
  bool all = true;
  for (const auto& p : verify::run_dinf_property_suite(trials, seed)) {
    out << (p.pass() ? "PASS " : "FAIL ") << p.name << " (" << p.instances - p.failures << "/" << p.instances
        << ")\n";
    if (!p.pass()) {
      out << "  first failing instance: " << p.first_failure << "\n";
      all = false;
    }
  }
  return all ? 0 : 1;
}

inline int cmd_verify_ldp(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                          unsigned workers, std::ostream& out, std::ostream& err) {
  config::LdpConfig ldp;
  try {
    ldp = config::ldp_from_json(config::load_document(config_path));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const VerifierOptions opt{ldp.trials, ldp.seed, workers};
    std::vector<std::pair<std::string, DeviationTrial>> rows;
    for (const auto& c : ldp.lower) {
      for (auto& t : verify_lower_deviation(c.model, c.mu, c.t, c.thresholds, opt)) {
        rows.emplace_back(config::model_label(c.model), t);
      }
    }
    for (const auto& c : ldp.upper) {
      for (auto& t : verify_upper_deviation(c.model, c.mu, c.t, c.thresholds, opt)) {
        rows.emplace_back(config::model_label(c.model), t);
      }
    }
    auto csv = detail::open_output(out_dir, "ldp.csv");
    csv << "model,mu,t,threshold,empirical_freq,bound,slack,pass\n";
    bool all = true;
    for (const auto& [label, t] : rows) {
      csv << '"' << label << '"' << "," << fmt_double(t.mu) << "," << t.t << "," << fmt_double(t.threshold) << ","
          << fmt_double(t.empirical_freq) << "," << fmt_double(t.bound) << "," << fmt_double(t.slack()) << ","
          << (t.pass() ? "true" : "false") << "\n";
      all = all && t.pass();
    }
    out << rows.size() << " cells, " << (all ? "all pass" : "FAILURES present") << "; wrote "
        << (out_dir / "ldp.csv").string() << "\n";
    return all ? 0 : 1;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "verification failed: " << e.what() << "\n";
    return 1;
  }
}

inline int cmd_show_index(const std::filesystem::path& samples_path, double mu, std::ostream& out,
                          std::ostream& err) {
  std::ifstream in(samples_path);
  if (!in) {
    err << "cannot open " << samples_path.string() << "\n";
    return 2;
  }
  if (!(mu < 1.0)) {
    err << "mu must be < 1\n";
    return 2;
  }
  EmpiricalDist f;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    double x = 0.0;
    std::size_t used = 0;
    try {
      x = std::stod(line.substr(first), &used);
    } catch (const std::exception&) {
      err << "line " << lineno << ": not a number\n";
      return 2;
    }
    if (line.find_first_not_of(" \t\r", first + used) != std::string::npos) {
      err << "line " << lineno << ": not a number\n";
      return 2;
    }
    if (!(x <= 1.0)) {
      err << "line " << lineno << ": sample " << line.substr(first) << " exceeds 1\n";
      return 2;
    }
    f.push(x);
  }
  if (f.empty()) {
    err << "no samples in " << samples_path.string() << "\n";
    return 2;
  }
  const DualSolution sol = solve_nu_star(f, mu);
  json j;
  j["schema_version"] = config::kSchemaVersion;
  j["samples"] = f.total_weight();
  j["mean"] = f.mean();
  j["mu"] = mu;
  j["dinf"] = sol.dinf;
  j["nu_star"] = sol.nu_star;
  j["at_boundary"] = sol.at_boundary;
  out << j.dump(2) << "\n";
  return 0;
}

/// Parses argv and dispatches to a subcommand.
inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"DMED bandit policy, D_inf index, and regret/deviation bounds"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir, samples_path;
  unsigned workers = default_workers();
  std::size_t arm = 0;
  std::uint64_t n = 0, trials = 200, seed = 0;
  double mu = 0.0;
  BoundOverrides ov;
  double eps_v = 0, delta_v = 0, r_v = 0;

  auto* sim = app.add_subcommand("simulate", "run seeded regret replications");
  sim->add_option("--config", config_path, "experiment config (JSON)")->required();
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--workers", workers, "worker threads (default $DMED_WORKERS or 1)");

  auto* bound = app.add_subcommand("bound", "finite-time regret bound for a suboptimal arm");
  bound->add_option("--config", config_path, "config with the true arm models")->required();
  bound->add_option("--arm", arm, "arm index (1-based)")->required();
  bound->add_option("--n", n, "round count")->required();
  auto* eps_opt = bound->add_option("--epsilon", eps_v);
  auto* delta_opt = bound->add_option("--delta", delta_v);
  auto* r_opt = bound->add_option("--r", r_v);

  auto* vd = app.add_subcommand("verify-dinf", "primal-dual and KKT property suite");
  vd->add_option("--trials", trials, "random instances")->required();
  vd->add_option("--seed", seed, "master seed");

  auto* vl = app.add_subcommand("verify-ldp", "Monte Carlo check of the deviation bounds");
  vl->add_option("--config", config_path, "config with an optional ldp section")->required();
  vl->add_option("--out", out_dir, "output directory")->required();
  vl->add_option("--workers", workers, "worker threads (default $DMED_WORKERS or 1)");

  auto* si = app.add_subcommand("show-index", "D_inf of a sample file");
  si->add_option("--samples", samples_path, "newline-separated samples <= 1")->required();
  si->add_option("--mu", mu, "threshold mean (< 1)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (*sim) return cmd_simulate(config_path, out_dir, workers, out, err);
  if (*bound) {
    if (*eps_opt) ov.epsilon = eps_v;
    if (*delta_opt) ov.delta = delta_v;
    if (*r_opt) ov.r = r_v;
    return cmd_bound(config_path, arm, n, ov, out, err);
  }
  if (*vd) return cmd_verify_dinf(trials, seed, out, err);
  if (*vl) return cmd_verify_ldp(config_path, out_dir, workers, out, err);
  if (*si) return cmd_show_index(samples_path, mu, out, err);
  return 2;
}

}  // namespace dmed::cli
