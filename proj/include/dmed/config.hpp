#pragma once

// JSON experiment documents.
//
//   {
//     "arms": [{"family": "bernoulli", "p": 0.7}, ...],
//     "policy": {"name": "dmed", "r": 0.1},
//     "horizon": 100000, "replications": 100, "seed": 1,
//     "checkpoints": [1000, 10000, 100000],
//     "ldp": {"trials": 100000, "seed": 7,
//             "lower": [{"model": {...}, "mu": 0.75, "t": [10], "v": [0.05]}],
//             "upper": [{"model": {...}, "mu": 0.5,  "t": [10], "u": [0.2]}]}
//   }
//
// Family keys: bernoulli{p}, two_point{x0,x1,p}, uniform{a,b},
// shifted_neg_exponential{rate}, shifted_neg_gamma{shape,rate},
// finite_support{values[],probs[]}.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dmed/arm_models.hpp"
#include "dmed/errors.hpp"
#include "dmed/policies.hpp"
#include "dmed/simulation.hpp"

namespace dmed::config {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  return v.get<double>();
}

inline std::uint64_t count(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(join(path, key), "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

template <typename T>
std::vector<T> list(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_array()) throw ConfigError(join(path, key), "expected an array");
  std::vector<T> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto& e = v[k];
    const std::string where = join(path, key) + "[" + std::to_string(k) + "]";
    if constexpr (std::is_integral_v<T>) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < 0) throw ConfigError(where, "expected a count");
    } else {
      if (!e.is_number()) throw ConfigError(where, "expected a number");
    }
    out.push_back(e.get<T>());
  }
  return out;
}

}  // namespace detail

inline ArmModel model_from_json(const json& j, const std::string& path) {
  using namespace detail;
  const json& fam = require(j, "family", path);
  if (!fam.is_string()) throw ConfigError(join(path, "family"), "expected a string");
  const auto name = fam.get<std::string>();
  ArmModel m;
  if (name == "bernoulli") {
    m = Bernoulli{number(j, "p", path)};
  } else if (name == "two_point") {
    m = TwoPoint{number(j, "x0", path), number(j, "x1", path), number(j, "p", path)};
  } else if (name == "uniform") {
    m = UniformInterval{number(j, "a", path), number(j, "b", path)};
  } else if (name == "shifted_neg_exponential") {
    m = ShiftedNegExponential{number(j, "rate", path)};
  } else if (name == "shifted_neg_gamma") {
    m = ShiftedNegGamma{number(j, "shape", path), number(j, "rate", path)};
  } else if (name == "finite_support") {
    m = FiniteSupport{list<double>(j, "values", path), list<double>(j, "probs", path)};
  } else {
    throw ConfigError(join(path, "family"), "unknown family '" + name + "'");
  }
  try {
    validate(m);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return m;
}

inline json model_to_json(const ArmModel& m) {
  json j;
  j["family"] = family_name(m);
  std::visit(overloaded{
                 [&](const Bernoulli& b) { j["p"] = b.p; },
                 [&](const TwoPoint& t) {
                   j["x0"] = t.x0;
                   j["x1"] = t.x1;
                   j["p"] = t.p;
                 },
                 [&](const UniformInterval& u) {
                   j["a"] = u.a;
                   j["b"] = u.b;
                 },
                 [&](const ShiftedNegExponential& e) { j["rate"] = e.rate; },
                 [&](const ShiftedNegGamma& g) {
                   j["shape"] = g.shape;
                   j["rate"] = g.rate;
                 },
                 [&](const FiniteSupport& f) {
                   j["values"] = f.values;
                   j["probs"] = f.probs;
                 },
             },
             m);
  return j;
}

/// Short human-readable label, e.g. "bernoulli(p=0.5)".
inline std::string model_label(const ArmModel& m) {
  const json j = model_to_json(m);
  std::ostringstream os;
  os << j["family"].get<std::string>() << "(";
  bool first = true;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "family") continue;
    os << (first ? "" : ";") << it.key() << "=" << it.value().dump();
    first = false;
  }
  os << ")";
  return os.str();
}

inline PolicySpec policy_from_json(const json& j, const std::string& path) {
  using namespace detail;
  PolicySpec spec;
  const json& name = require(j, "name", path);
  if (!name.is_string()) throw ConfigError(join(path, "name"), "expected a string");
  spec.name = name.get<std::string>();
  if (spec.name != "dmed" && spec.name != "ucb1" && spec.name != "egreedy") {
    throw ConfigError(join(path, "name"), "unknown policy '" + spec.name + "'");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "name") continue;
    if (!it.value().is_number()) throw ConfigError(join(path, it.key()), "expected a number");
    spec.params[it.key()] = it.value().get<double>();
  }
  return spec;
}

inline json policy_to_json(const PolicySpec& p) {
  json j;
  j["name"] = p.name;
  for (const auto& [k, v] : p.params) j[k] = v;
  return j;
}

inline json load_document(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), "cannot open config file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string(), std::string("not valid JSON: ") + e.what());
  }
}

inline std::vector<ArmModel> arms_from_json(const json& doc) {
  const json& arms = detail::require(doc, "arms", "");
  if (!arms.is_array() || arms.size() < 2) throw ConfigError("arms", "expected an array of at least 2 models");
  std::vector<ArmModel> out;
  for (std::size_t k = 0; k < arms.size(); ++k) out.push_back(model_from_json(arms[k], "arms[" + std::to_string(k) + "]"));
  return out;
}

inline ExperimentConfig experiment_from_json(const json& doc) {
  using namespace detail;
  ExperimentConfig c;
  c.arms = arms_from_json(doc);
  c.policy = policy_from_json(require(doc, "policy", ""), "policy");
  c.horizon = count(doc, "horizon", "");
  c.replications = count(doc, "replications", "");
  c.seed = count(doc, "seed", "");
  if (doc.contains("checkpoints")) c.checkpoints = list<std::uint64_t>(doc, "checkpoints", "");
  if (c.horizon < c.arms.size()) throw ConfigError("horizon", "must be at least the number of arms");
  if (c.replications < 1) throw ConfigError("replications", "must be at least 1");
  for (std::size_t k = 0; k < c.checkpoints.size(); ++k) {
    const auto cp = c.checkpoints[k];
    if (cp < 1 || cp > c.horizon || (k > 0 && cp <= c.checkpoints[k - 1])) {
      throw ConfigError("checkpoints[" + std::to_string(k) + "]", "must be increasing within [1, horizon]");
    }
  }
  return c;
}

inline json experiment_to_json(const ExperimentConfig& c) {
  json j;
  j["arms"] = json::array();
  for (const auto& m : c.arms) j["arms"].push_back(model_to_json(m));
  j["policy"] = policy_to_json(c.policy);
  j["horizon"] = c.horizon;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["checkpoints"] = c.effective_checkpoints();
  return j;
}

struct LdpCell {
  ArmModel model;
  double mu = 0.0;
  std::vector<std::uint64_t> t;
  std::vector<double> thresholds;
};

struct LdpConfig {
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 0;
  std::vector<LdpCell> lower;
  std::vector<LdpCell> upper;
};

/// The cells used when a document has no "ldp" section.
inline LdpConfig default_ldp_config() {
  LdpConfig c;
  c.lower.push_back({Bernoulli{0.5}, 0.75, {10, 50, 200}, {0.02, 0.05, 0.1}});
  c.lower.push_back({ShiftedNegExponential{1.0}, 0.5, {10, 50, 200}, {0.02, 0.05, 0.1}});
  c.upper.push_back({Bernoulli{0.7}, 0.5, {10, 50, 200}, {0.05, 0.2, 0.5}});
  return c;
}

inline LdpConfig ldp_from_json(const json& doc) {
  using namespace detail;
  if (!doc.contains("ldp")) return default_ldp_config();
  const json& l = doc["ldp"];
  if (!l.is_object()) throw ConfigError("ldp", "expected an object");
  LdpConfig c;
  if (l.contains("trials")) c.trials = count(l, "trials", "ldp");
  if (l.contains("seed")) c.seed = count(l, "seed", "ldp");
  auto cells = [&](const char* key, const char* thr) {
    std::vector<LdpCell> out;
    if (!l.contains(key)) return out;
    const json& arr = l[key];
    const std::string base = std::string("ldp.") + key;
    if (!arr.is_array()) throw ConfigError(base, "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string path = base + "[" + std::to_string(k) + "]";
      LdpCell cell{model_from_json(require(arr[k], "model", path), path + ".model"), number(arr[k], "mu", path),
                   list<std::uint64_t>(arr[k], "t", path), list<double>(arr[k], thr, path)};
      out.push_back(std::move(cell));
    }
    return out;
  };
  c.lower = cells("lower", "v");
  c.upper = cells("upper", "u");
  if (c.lower.empty() && c.upper.empty()) {
    const auto d = default_ldp_config();
    c.lower = d.lower;
    c.upper = d.upper;
  }
  return c;
}

}  // namespace dmed::config
