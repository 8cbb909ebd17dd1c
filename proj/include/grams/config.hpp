#pragma once

// Flat `key = value` run configuration: parsing with line-precise errors,
// range validation, per-optimizer defaults, and the objective/init factories
// behind the config name tokens.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grams/objectives.hpp"
#include "grams/optim.hpp"
#include "grams/rng.hpp"
#include "grams/vec.hpp"

namespace grams {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  OptKind kind = OptKind::adam;
  std::string optimizer;
  std::string objective;
  HyperParams hp;
  long steps = 0;
  std::uint64_t seed = 0;
  std::optional<Vec> init_values;      // explicit starting point
  std::string init_preset = "default"; // used when init_values is empty
  double grad_clip = 0.0;              // 0 disables the global-norm clamp
};

inline OptKind optimizer_from_name(const std::string& name) {
  if (name == "adam") return OptKind::adam;
  if (name == "adamw") return OptKind::adamw;
  if (name == "grams") return OptKind::grams;
  if (name == "lion") return OptKind::lion;
  if (name == "cadam") return OptKind::cadam;
  if (name == "clion") return OptKind::clion;
  if (name == "rmsprop") return OptKind::rmsprop;
  throw ConfigError("unknown optimizer '" + name + "'");
}

inline bool lion_family(OptKind k) { return k == OptKind::lion || k == OptKind::clion; }

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] inline void config_fail(int line, const std::string& msg) {
  throw ConfigError("config error: line " + std::to_string(line) + ": " + msg);
}

inline double parse_double(const std::string& v, int line, const std::string& key) {
  std::string_view sv = v;
  if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
  double out = 0.0;
  const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), out);
  if (res.ec != std::errc{} || res.ptr != sv.data() + sv.size())
    config_fail(line, "malformed number for '" + key + "': " + v);
  return out;
}

inline long parse_long(const std::string& v, int line, const std::string& key) {
  long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    config_fail(line, "malformed integer for '" + key + "': " + v);
  return out;
}

inline std::uint64_t parse_u64(const std::string& v, int line, const std::string& key) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    config_fail(line, "malformed integer for '" + key + "': " + v);
  return out;
}

inline Vec parse_vector(const std::string& v, int line, const std::string& key) {
  Vec out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const std::size_t comma = v.find(',', pos);
    const std::string piece =
        trim(std::string_view(v).substr(pos, comma == std::string::npos ? v.size() - pos
                                                                        : comma - pos));
    if (piece.empty()) config_fail(line, "malformed vector for '" + key + "': " + v);
    out.push_back(parse_double(piece, line, key));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  static const std::vector<std::string> known = {
      "optimizer", "objective", "lr",   "beta1", "beta2",     "eps",  "weight_decay",
      "schedule",  "warmup_steps", "steps", "seed",  "init", "grad_clip"};

  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> kv;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line =
        text.substr(pos, nl == std::string::npos ? text.size() - pos : nl - pos);
    ++line_no;
    pos = (nl == std::string::npos) ? text.size() + 1 : nl + 1;

    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;

    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) detail::config_fail(line_no, "expected key = value");
    const std::string key = detail::trim(std::string_view(stripped).substr(0, eq));
    const std::string value = detail::trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) detail::config_fail(line_no, "empty key");
    if (value.empty()) detail::config_fail(line_no, "empty value for '" + key + "'");

    bool ok = false;
    for (const std::string& k : known) ok = ok || (k == key);
    if (!ok) detail::config_fail(line_no, "unknown key '" + key + "'");
    if (kv.count(key)) detail::config_fail(line_no, "duplicate key '" + key + "'");
    kv.emplace(key, Entry{value, line_no});
  }

  auto require = [&](const char* key) -> const Entry& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw ConfigError(std::string("config error: missing required key '") + key + "'");
    return it->second;
  };

  RunConfig cfg;
  {
    const Entry& e = require("optimizer");
    try {
      cfg.kind = optimizer_from_name(e.value);
    } catch (const ConfigError& err) {
      detail::config_fail(e.line, err.what());
    }
    cfg.optimizer = e.value;
  }
  {
    const Entry& e = require("objective");
    if (e.value != "toy2d" && e.value != "diag_quadratic" && e.value != "rosenbrock" &&
        e.value != "logreg" && e.value != "mlp")
      detail::config_fail(e.line, "unknown objective '" + e.value + "'");
    cfg.objective = e.value;
  }
  {
    const Entry& e = require("lr");
    cfg.hp.eta_base = detail::parse_double(e.value, e.line, "lr");
    if (!(cfg.hp.eta_base > 0.0)) detail::config_fail(e.line, "'lr' must be positive");
  }
  {
    const Entry& e = require("steps");
    cfg.steps = detail::parse_long(e.value, e.line, "steps");
    if (cfg.steps < 1) detail::config_fail(e.line, "'steps' must be >= 1");
  }
  cfg.seed = detail::parse_u64(require("seed").value, require("seed").line, "seed");

  cfg.hp.beta2 = lion_family(cfg.kind) || cfg.kind == OptKind::rmsprop ? 0.99 : 0.999;
  if (auto it = kv.find("beta1"); it != kv.end()) {
    cfg.hp.beta1 = detail::parse_double(it->second.value, it->second.line, "beta1");
    if (!(cfg.hp.beta1 >= 0.0 && cfg.hp.beta1 < 1.0))
      detail::config_fail(it->second.line, "'beta1' must lie in [0, 1)");
  }
  if (auto it = kv.find("beta2"); it != kv.end()) {
    cfg.hp.beta2 = detail::parse_double(it->second.value, it->second.line, "beta2");
    if (!(cfg.hp.beta2 >= 0.0 && cfg.hp.beta2 < 1.0))
      detail::config_fail(it->second.line, "'beta2' must lie in [0, 1)");
  }
  if (auto it = kv.find("eps"); it != kv.end()) {
    cfg.hp.epsilon = detail::parse_double(it->second.value, it->second.line, "eps");
    if (!(cfg.hp.epsilon > 0.0)) detail::config_fail(it->second.line, "'eps' must be positive");
  }
  if (auto it = kv.find("weight_decay"); it != kv.end()) {
    cfg.hp.weight_decay = detail::parse_double(it->second.value, it->second.line, "weight_decay");
    if (cfg.hp.weight_decay < 0.0)
      detail::config_fail(it->second.line, "'weight_decay' must be nonnegative");
  }
  if (auto it = kv.find("schedule"); it != kv.end()) {
    const std::string& v = it->second.value;
    if (v == "constant")
      cfg.hp.schedule = Schedule::constant;
    else if (v == "constant-with-warmup")
      cfg.hp.schedule = Schedule::constant_with_warmup;
    else if (v == "linear-decay")
      cfg.hp.schedule = Schedule::linear_decay;
    else if (v == "cosine")
      cfg.hp.schedule = Schedule::cosine;
    else
      detail::config_fail(it->second.line, "unknown schedule '" + v + "'");
  }
  if (auto it = kv.find("warmup_steps"); it != kv.end()) {
    cfg.hp.warmup_steps = detail::parse_long(it->second.value, it->second.line, "warmup_steps");
    if (cfg.hp.warmup_steps < 1)
      detail::config_fail(it->second.line, "'warmup_steps' must be >= 1");
  }
  if (cfg.hp.schedule == Schedule::constant_with_warmup && cfg.hp.warmup_steps < 1)
    throw ConfigError("config error: schedule constant-with-warmup requires warmup_steps");
  cfg.hp.total_steps = cfg.steps;

  if (auto it = kv.find("init"); it != kv.end()) {
    const std::string& v = it->second.value;
    const char c0 = v[0];
    if (v.find(',') != std::string::npos || c0 == '-' || c0 == '+' || c0 == '.' ||
        std::isdigit(static_cast<unsigned char>(c0))) {
      cfg.init_values = detail::parse_vector(v, it->second.line, "init");
    } else if (v == "default" || v == "zeros" || v == "ones" || v == "random") {
      cfg.init_preset = v;
    } else {
      detail::config_fail(it->second.line, "unknown init preset '" + v + "'");
    }
  }
  if (auto it = kv.find("grad_clip"); it != kv.end()) {
    cfg.grad_clip = detail::parse_double(it->second.value, it->second.line, "grad_clip");
    if (cfg.grad_clip < 0.0)
      detail::config_fail(it->second.line, "'grad_clip' must be nonnegative");
  }
  return cfg;
}

// Objective presets behind the config name tokens. The seeded objectives use
// the run seed, so a config pins its dataset.
inline Objective make_objective(const RunConfig& cfg) {
  if (cfg.objective == "toy2d") return toy2d();
  if (cfg.objective == "diag_quadratic") return diag_quadratic(Vec{1.0, 0.1, 0.01});
  if (cfg.objective == "rosenbrock") return rosenbrock();
  if (cfg.objective == "logreg") return logistic_regression(cfg.seed, 64, 4);
  if (cfg.objective == "mlp") return tiny_mlp(cfg.seed, 4);
  throw ConfigError("unknown objective '" + cfg.objective + "'");
}

inline Vec resolve_init(const RunConfig& cfg, const Objective& obj) {
  if (cfg.init_values) {
    if (cfg.init_values->size() != obj.dim)
      throw ConfigError("config error: init has " + std::to_string(cfg.init_values->size()) +
                        " entries but objective '" + obj.name + "' has dimension " +
                        std::to_string(obj.dim));
    return *cfg.init_values;
  }
  if (cfg.init_preset == "zeros") return Vec(obj.dim, 0.0);
  if (cfg.init_preset == "ones") return Vec(obj.dim, 1.0);
  if (cfg.init_preset == "random") {
    SplitMix64 rng(cfg.seed ^ 0xa5a5a5a5a5a5a5a5ULL);
    Vec w(obj.dim);
    for (double& e : w) e = rng.gaussian();
    return w;
  }
  return obj.default_init;
}

}  // namespace grams
