#include "cbsae/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cbsae/error.hpp"

namespace cbsae {

namespace {

std::string trimmed(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trimmed(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const auto d = parse_double(v);
  if (!d || !std::isfinite(*d)) {
    throw ValidationError("config key " + key + ": expected a finite number, got \"" + v + "\"");
  }
  return *d;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError("config key " + key + ": expected an integer, got \"" + v + "\"");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config key " + key + ": expected true/false, got \"" + v + "\"");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&,
                                  const std::filesystem::path&)>;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  std::filesystem::path p(v);
  return p.is_absolute() || base.empty() ? p : base / p;
}

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"area_csv", [](RunConfig& c, auto&, auto& v, auto& b) { c.area_csv = resolve(b, v); }},
      {"edge_list", [](RunConfig& c, auto&, auto& v, auto& b) { c.edge_list = resolve(b, v); }},
      {"label_column", [](RunConfig& c, auto&, auto& v, auto&) { c.schema.label = v; }},
      {"y_column", [](RunConfig& c, auto&, auto& v, auto&) { c.schema.y = v; }},
      {"d_column", [](RunConfig& c, auto&, auto& v, auto&) { c.schema.sampling_variance = v; }},
      {"covariates", [](RunConfig& c, auto&, auto& v, auto&) { c.schema.covariates = split_list(v); }},
      {"intercept", [](RunConfig& c, auto& k, auto& v, auto&) { c.schema.intercept = to_bool(k, v); }},
      {"phi_column", [](RunConfig& c, auto&, auto& v, auto&) { c.schema.loss_weight = v; }},
      {"group_column", [](RunConfig& c, auto&, auto& v, auto&) { c.schema.group = v; }},
      {"benchmark_weight_column",
       [](RunConfig& c, auto&, auto& v, auto&) { c.schema.benchmark_weight = v; }},
      {"benchmark_target",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.benchmark_target = to_double(k, v); }},
      {"benchmark_target_source",
       [](RunConfig& c, auto&, auto& v, auto&) { c.benchmark_target_source = v; }},
      {"constraints_file",
       [](RunConfig& c, auto&, auto& v, auto& b) { c.constraints_file = resolve(b, v); }},
      {"gamma", [](RunConfig& c, auto& k, auto& v, auto&) { c.gamma = to_double(k, v); }},
      {"gamma_grid", [](RunConfig& c, auto&, auto& v, auto&) { c.gamma_grid = parse_gamma_grid(v); }},
      {"gibbs_iter",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.gibbs.n_iter = static_cast<int>(to_int(k, v)); }},
      {"gibbs_burn",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.gibbs.n_burn = static_cast<int>(to_int(k, v)); }},
      {"gibbs_thin",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.gibbs.thin = static_cast<int>(to_int(k, v)); }},
      {"bootstrap_reps",
       [](RunConfig& c, auto& k, auto& v, auto&) { c.bootstrap_reps = static_cast<int>(to_int(k, v)); }},
      {"bootstrap_gamma_policy",
       [](RunConfig& c, auto& k, auto& v, auto&) {
         if (v == "fixed") c.bootstrap_gamma_policy = GammaPolicy::kFixed;
         else if (v == "recv") c.bootstrap_gamma_policy = GammaPolicy::kReCrossValidate;
         else throw ValidationError("config key " + k + ": expected fixed or recv");
       }},
      {"threads",
       [](RunConfig& c, auto& k, auto& v, auto&) {
         const auto n = to_int(k, v);
         if (n < 1) throw ValidationError("config key threads must be >= 1");
         c.threads = static_cast<unsigned>(n);
       }},
      {"out_dir", [](RunConfig& c, auto&, auto& v, auto& b) { c.out_dir = resolve(b, v); }},
      {"seed",
       [](RunConfig& c, auto& k, auto& v, auto&) {
         const auto n = to_int(k, v);
         if (n < 0) throw ValidationError("config key seed must be >= 0");
         c.seed = static_cast<std::uint64_t>(n);
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, s] : setters()) out.push_back(k);
    return out;
  }();
  return keys;
}

GammaGridSpec parse_gamma_grid(std::string_view text) {
  const auto parts = split_list(text);
  if (parts.size() != 3) throw ValidationError("gamma grid must be lo,hi,n");
  GammaGridSpec g;
  g.lo = to_double("gamma_grid", parts[0]);
  g.hi = to_double("gamma_grid", parts[1]);
  const auto n = to_int("gamma_grid", parts[2]);
  if (!(g.lo > 0.0) || !(g.hi >= g.lo) || n < 1) {
    throw ValidationError("gamma grid needs 0 < lo <= hi and n >= 1");
  }
  g.n = static_cast<std::size_t>(n);
  return g;
}

void RunConfig::validate() const {
  if (area_csv.empty()) throw ValidationError("config: area_csv is required");
  if (edge_list.empty()) throw ValidationError("config: edge_list is required");
  if (gamma && gamma_grid) {
    throw ValidationError("config: choose either gamma or gamma_grid, not both");
  }
  if (gamma && (!std::isfinite(*gamma) || *gamma < 0.0)) {
    throw ValidationError("config: gamma must be finite and >= 0");
  }
  if (benchmark_target && !std::isfinite(*benchmark_target)) {
    throw ValidationError("config: benchmark_target must be finite");
  }
  if (constraints_file && (benchmark_target || schema.benchmark_weight)) {
    throw ValidationError(
        "config: constraints_file excludes benchmark_weight_column/benchmark_target");
  }
  if (benchmark_target.has_value() != schema.benchmark_weight.has_value()) {
    throw ValidationError(
        "config: benchmark_target and benchmark_weight_column must be given together");
  }
  if (bootstrap_reps < 1) throw ValidationError("config: bootstrap_reps must be >= 1");
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                       const std::string& source) {
  std::map<std::string, const Setter*> lookup;
  for (const auto& [k, s] : setters()) lookup.emplace(k, &s);

  RunConfig cfg;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (trimmed(line).empty()) continue;
    const auto eq = line.find('=');
    const auto where = source + ":" + std::to_string(lineno);
    if (eq == std::string_view::npos) throw ValidationError(where + ": expected key = value");
    const auto key = trimmed(line.substr(0, eq));
    const auto value = trimmed(line.substr(eq + 1));
    const auto it = lookup.find(key);
    if (it == lookup.end()) throw ValidationError(where + ": unknown key \"" + key + "\"");
    if (!seen.insert(key).second) throw ValidationError(where + ": repeated key \"" + key + "\"");
    (*it->second)(cfg, key, value, base_dir);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), path.string());
}

}  // namespace cbsae
