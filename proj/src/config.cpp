#include "bq/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "bq/errors.hpp"

namespace bq {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string num(double v) { return fmt::format("{}", v); }

std::string num_list(const std::vector<double>& v) { return fmt::format("{}", fmt::join(v, ",")); }

double to_double(const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

std::uint64_t to_u64(const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("not an unsigned integer: '" + text + "'");
  return v;
}

BulletinMode to_mode(const std::string& text) {
  if (text == "alternate") return BulletinMode::Alternate;
  if (text == "fsd") return BulletinMode::FsdOnly;
  if (text == "icd") return BulletinMode::IcdOnly;
  if (text == "none") return BulletinMode::None;
  throw std::invalid_argument("expected alternate|fsd|icd|none");
}

std::vector<bool> to_policies(const std::string& text) {
  if (text == "off") return {false};
  if (text == "on") return {true};
  if (text == "both") return {false, true};
  throw std::invalid_argument("expected on|off|both");
}

std::string from_policies(const std::vector<bool>& p) {
  if (p.size() == 2) return "both";
  return !p.empty() && p.front() ? "on" : "off";
}

std::vector<ReferencePair> to_references(const std::string& text) {
  // r:mu_i:mu_j entries separated by commas
  std::vector<ReferencePair> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto a = item.find(':');
    const auto b = item.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw std::invalid_argument("reference entries take the form r:mu_i:mu_j");
    out.push_back({to_double(trim(item.substr(0, a))), to_double(trim(item.substr(a + 1, b - a - 1))),
                   to_double(trim(item.substr(b + 1)))});
  }
  return out;
}

std::string from_references(const std::vector<ReferencePair>& refs) {
  std::vector<std::string> parts;
  for (const auto& p : refs) parts.push_back(fmt::format("{}:{}:{}", p.r, p.mu_i, p.mu_j));
  return fmt::format("{}", fmt::join(parts, ","));
}

struct Key {
  std::function<void(AppConfig&, const std::string&)> set;
  std::function<std::string(const AppConfig&)> get;  // empty string: unset
};

using Registry = std::map<std::string, std::map<std::string, Key>>;

const Registry& registry() {
  static const Registry reg = [] {
    Registry r;
    // [system]
    r["system"]["lambda"] = {[](AppConfig& c, const std::string& v) { c.sim.lambda = to_double(v); },
                             [](const AppConfig& c) { return num(c.sim.lambda); }};
    r["system"]["split"] = {[](AppConfig& c, const std::string& v) { c.sim.split = to_double(v); },
                            [](const AppConfig& c) { return num(c.sim.split); }};
    r["system"]["mu_i"] = {[](AppConfig& c, const std::string& v) { c.sweep.mu_i = to_double(v); },
                           [](const AppConfig& c) { return c.sweep.mu_i ? num(*c.sweep.mu_i) : std::string(); }};
    r["system"]["mu_j"] = {[](AppConfig& c, const std::string& v) { c.sweep.mu_j = to_double(v); },
                           [](const AppConfig& c) { return c.sweep.mu_j ? num(*c.sweep.mu_j) : std::string(); }};
    r["system"]["mu_min"] = {[](AppConfig& c, const std::string& v) { c.sim.mu_min = to_double(v); },
                             [](const AppConfig& c) { return num(c.sim.mu_min); }};
    r["system"]["mu_max"] = {[](AppConfig& c, const std::string& v) { c.sim.mu_max = to_double(v); },
                             [](const AppConfig& c) { return num(c.sim.mu_max); }};
    r["system"]["util_i"] = {[](AppConfig& c, const std::string& v) { c.sweep.util_i = to_double(v); },
                             [](const AppConfig& c) { return num(c.sweep.util_i); }};
    r["system"]["util_j"] = {[](AppConfig& c, const std::string& v) { c.sweep.util_j = to_double(v); },
                             [](const AppConfig& c) { return num(c.sweep.util_j); }};
    r["system"]["lattice"] = {[](AppConfig& c, const std::string& v) { c.sweep.lattice = to_double(v); },
                              [](const AppConfig& c) { return num(c.sweep.lattice); }};
    // [behavior]
    r["behavior"]["t_local"] = {[](AppConfig& c, const std::string& v) { c.sim.bp.t_local = to_double(v); },
                                [](const AppConfig& c) { return num(c.sim.bp.t_local); }};
    r["behavior"]["d"] = {[](AppConfig& c, const std::string& v) { c.sim.bp.d = to_double(v); },
                          [](const AppConfig& c) { return num(c.sim.bp.d); }};
    r["behavior"]["eta"] = {[](AppConfig& c, const std::string& v) { c.sim.bp.eta = to_double(v); },
                            [](const AppConfig& c) { return num(c.sim.bp.eta); }};
    r["behavior"]["r"] = {[](AppConfig& c, const std::string& v) { c.sim.bp.r = to_double(v); },
                          [](const AppConfig& c) { return num(c.sim.bp.r); }};
    // [simulation]
    r["simulation"]["horizon"] = {[](AppConfig& c, const std::string& v) { c.sim.horizon = to_double(v); },
                                  [](const AppConfig& c) { return num(c.sim.horizon); }};
    r["simulation"]["warmup"] = {[](AppConfig& c, const std::string& v) { c.sim.warmup = to_double(v); },
                                 [](const AppConfig& c) { return c.sim.warmup ? num(*c.sim.warmup) : std::string(); }};
    r["simulation"]["seed"] = {[](AppConfig& c, const std::string& v) { c.sweep.base_seed = to_u64(v); },
                               [](const AppConfig& c) { return std::to_string(c.sweep.base_seed); }};
    r["simulation"]["bulletins"] = {[](AppConfig& c, const std::string& v) { c.sim.bulletins = to_mode(v); },
                                    [](const AppConfig& c) { return std::string(to_string(c.sim.bulletins)); }};
    r["simulation"]["chain_spread"] = {[](AppConfig& c, const std::string& v) { c.sim.chain.spread = to_double(v); },
                                       [](const AppConfig& c) { return num(c.sim.chain.spread); }};
    r["simulation"]["chain_side_weight"] = {
        [](AppConfig& c, const std::string& v) { c.sim.chain.side_weight = to_double(v); },
        [](const AppConfig& c) { return num(c.sim.chain.side_weight); }};
    // [policy]
    r["policy"]["mode"] = {[](AppConfig& c, const std::string& v) { c.sweep.policies = to_policies(v); },
                           [](const AppConfig& c) { return from_policies(c.sweep.policies); }};
    r["policy"]["alpha"] = {[](AppConfig& c, const std::string& v) { c.sim.policy_alpha = to_double(v); },
                            [](const AppConfig& c) { return num(c.sim.policy_alpha); }};
    r["policy"]["step"] = {[](AppConfig& c, const std::string& v) { c.sim.policy_step = to_double(v); },
                           [](const AppConfig& c) { return num(c.sim.policy_step); }};
    // [sweep]
    r["sweep"]["intervals"] = {[](AppConfig& c, const std::string& v) { c.sweep.intervals = parse_number_list(v); },
                               [](const AppConfig& c) { return num_list(c.sweep.intervals); }};
    r["sweep"]["lambdas"] = {[](AppConfig& c, const std::string& v) { c.sweep.lambdas = parse_number_list(v); },
                             [](const AppConfig& c) { return num_list(c.sweep.lambdas); }};
    r["sweep"]["replications"] = {
        [](AppConfig& c, const std::string& v) { c.sweep.replications = static_cast<int>(to_u64(v)); },
        [](const AppConfig& c) { return std::to_string(c.sweep.replications); }};
    // [weights]
    r["weights"]["tau"] = {[](AppConfig& c, const std::string& v) { c.sim.weights.tau = to_double(v); },
                           [](const AppConfig& c) { return num(c.sim.weights.tau); }};
    r["weights"]["phi"] = {[](AppConfig& c, const std::string& v) { c.sim.weights.phi = to_double(v); },
                           [](const AppConfig& c) { return num(c.sim.weights.phi); }};
    r["weights"]["psi"] = {[](AppConfig& c, const std::string& v) { c.sim.weights.psi = to_double(v); },
                           [](const AppConfig& c) { return num(c.sim.weights.psi); }};
    // [optimize]
    r["optimize"]["lambda_i"] = {
        [](AppConfig& c, const std::string& v) { c.optimize.system.lambda_i = to_double(v); },
        [](const AppConfig& c) { return num(c.optimize.system.lambda_i); }};
    r["optimize"]["lambda_j"] = {
        [](AppConfig& c, const std::string& v) { c.optimize.system.lambda_j = to_double(v); },
        [](const AppConfig& c) { return num(c.optimize.system.lambda_j); }};
    r["optimize"]["grid_lo"] = {[](AppConfig& c, const std::string& v) { c.optimize.grid.lo = to_double(v); },
                                [](const AppConfig& c) { return num(c.optimize.grid.lo); }};
    r["optimize"]["grid_hi"] = {[](AppConfig& c, const std::string& v) { c.optimize.grid.hi = to_double(v); },
                                [](const AppConfig& c) { return num(c.optimize.grid.hi); }};
    r["optimize"]["grid_step"] = {[](AppConfig& c, const std::string& v) { c.optimize.grid.step = to_double(v); },
                                  [](const AppConfig& c) { return num(c.optimize.grid.step); }};
    r["optimize"]["reference"] = {
        [](AppConfig& c, const std::string& v) { c.optimize.references = to_references(v); },
        [](const AppConfig& c) { return from_references(c.optimize.references); }};
    return r;
  }();
  return reg;
}

}  // namespace

void finalize(AppConfig& cfg) {
  // Shared bounds; initial rates of the base config follow the sweep rule.
  cfg.optimize.system.mu_min = cfg.sim.mu_min;
  cfg.optimize.system.mu_max = cfg.sim.mu_max;
  cfg.sim.mu_i = cfg.sweep.mu_i.value_or(initial_rate(cfg.sim.lambda_i(), cfg.sweep.util_i, cfg.sweep.lattice));
  cfg.sim.mu_j = cfg.sweep.mu_j.value_or(initial_rate(cfg.sim.lambda_j(), cfg.sweep.util_j, cfg.sweep.lattice));
  cfg.sim.mu_i = std::max(cfg.sim.mu_i, cfg.sim.mu_min);
  cfg.sim.mu_j = std::max(cfg.sim.mu_j, cfg.sim.mu_min);
  cfg.sim.seed = cfg.sweep.base_seed;
  cfg.sim.policy = cfg.sweep.policies.back();
}


std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(item));
  }
  return out;
}

void validate(const AppConfig& cfg) {
  cfg.sweep.validate();
  cfg.sim.validate();
  try {
    cfg.sim.weights.validate();
  } catch (const InvalidParams& e) {
    throw ValidationError("weights", e.what());
  }
  if (!(cfg.sim.policy_alpha > 0.0 && cfg.sim.policy_alpha < 1.0))
    throw ValidationError("alpha", "must lie in (0, 1)");
  if (!(cfg.sim.policy_step > 0.0)) throw ValidationError("step", "must be positive");
  for (double r : cfg.sweep.intervals)
    for (double lambda : cfg.sweep.lambdas) {
      auto cell = cell_config(cfg.sim, cfg.sweep, r, lambda, false, 0);
      cell.validate();
    }
  try {
    cfg.optimize.system.validate();
    (void)cfg.optimize.grid.values();
  } catch (const Error& e) {
    throw ValidationError("optimize", e.what());
  }
  for (const auto& ref : cfg.optimize.references)
    if (!(ref.r > 0.0)) throw ValidationError("reference", "dispatch interval must be positive");
}

AppConfig parse_config_text(const std::string& text) {
  AppConfig cfg;
  const auto& reg = registry();
  std::map<std::string, std::map<std::string, int>> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!reg.contains(section)) throw ParseError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ParseError(line_no, "key '" + key + "' outside any section");
    const auto& keys = reg.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) throw ParseError(line_no, "unknown key '" + key + "' in [" + section + "]");
    if (seen[section].contains(key))
      throw ParseError(line_no, "duplicate key '" + key + "' (first on line " +
                                    std::to_string(seen[section][key]) + ")");
    seen[section][key] = line_no;
    if (value.empty()) throw ParseError(line_no, "empty value for '" + key + "'");
    try {
      it->second.set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, section + "." + key + ": " + e.what());
    }
  }
  if (!seen["system"].contains("lambda")) throw ValidationError("system.lambda", "is required");
  if (!seen["simulation"].contains("horizon")) throw ValidationError("simulation.horizon", "is required");
  finalize(cfg);
  validate(cfg);
  return cfg;
}

AppConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const AppConfig& cfg) {
  std::string out;
  for (const auto& [section, keys] : registry()) {
    out += "[" + section + "]\n";
    for (const auto& [key, handler] : keys) {
      const auto value = handler.get(cfg);
      if (!value.empty()) out += key + " = " + value + "\n";
    }
    out += "\n";
  }
  return out;
}

std::string config_digest(const AppConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace bq

namespace bq {

AppConfig default_config() {
  AppConfig cfg;
  finalize(cfg);
  validate(cfg);
  return cfg;
}

}  // namespace bq
