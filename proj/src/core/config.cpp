#include "ergtrack/core/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ergtrack/core/error.hpp"

namespace ergtrack {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  if (s.empty() || s[0] == '-') return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtoull(s.c_str(), &end, 10);
  return errno == 0 && end == s.c_str() + s.size();
}

}  // namespace

void ConfigSection::set(const std::string& key, std::string value, int line) {
  if (entries_.count(key))
    throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "' in [" + name_ + "]");
  entries_[key] = Entry{std::move(value), line};
}

void ConfigSection::fail(const std::string& key, const std::string& what) const {
  const auto it = entries_.find(key);
  const std::string where = it != entries_.end() ? "line " + std::to_string(it->second.line) + ": " : "";
  throw ConfigError(where + "[" + name_ + "] field '" + key + "': " + what);
}

const ConfigSection::Entry& ConfigSection::require(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("[" + name_ + "] is missing required field '" + key + "'");
  used_.insert(key);
  return it->second;
}

std::string ConfigSection::get_string(const std::string& key) const { return require(key).value; }

std::optional<std::string> ConfigSection::find_string(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return require(key).value;
}

double ConfigSection::get_double(const std::string& key) const {
  double v;
  if (!parse_double(require(key).value, v)) fail(key, "expected a number");
  return v;
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::uint64_t ConfigSection::get_u64(const std::string& key) const {
  std::uint64_t v;
  if (!parse_u64(require(key).value, v)) fail(key, "expected a non-negative integer");
  return v;
}

std::uint64_t ConfigSection::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_u64(key) : fallback;
}

bool ConfigSection::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = require(key).value;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "expected true or false");
}

std::vector<double> ConfigSection::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(require(key).value)) {
    double v;
    if (!parse_double(item, v)) fail(key, "'" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "expected at least one number");
  return out;
}

std::vector<std::uint64_t> ConfigSection::get_u64s(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(require(key).value)) {
    std::uint64_t v;
    if (!parse_u64(item, v)) fail(key, "'" + item + "' is not a non-negative integer");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "expected at least one integer");
  return out;
}

std::vector<std::vector<double>> ConfigSection::get_matrix(const std::string& key) const {
  std::vector<std::vector<double>> out;
  std::stringstream rows(require(key).value);
  std::string row;
  while (std::getline(rows, row, ';')) {
    std::vector<double> r;
    for (const auto& item : split_list(row)) {
      double v;
      if (!parse_double(item, v)) fail(key, "'" + item + "' is not a number");
      r.push_back(v);
    }
    if (!r.empty()) out.push_back(std::move(r));
  }
  if (out.empty()) fail(key, "expected a matrix");
  return out;
}

Angle ConfigSection::get_angle(const std::string& key) const {
  try {
    return parse_angle(require(key).value);
  } catch (const ConfigError& e) {
    fail(key, e.what());
  }
}

void ConfigSection::finish() const {
  for (const auto& [key, entry] : entries_)
    if (!used_.count(key))
      throw ConfigError("line " + std::to_string(entry.line) + ": unknown field '" + key + "' in [" + name_ + "]");
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  ConfigSection* current = nullptr;
  std::optional<std::string> schema;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(where + "empty section name");
      if (cfg.sections_.count(name)) throw ConfigError(where + "duplicate section [" + name + "]");
      current = &cfg.sections_.emplace(name, ConfigSection(name, line_no)).first->second;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key before '='");
    if (!current) {
      if (key != "schema") throw ConfigError(where + "field '" + key + "' must appear inside a section");
      schema = value;
      continue;
    }
    try {
      current->set(key, value, line_no);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + e.what());
    }
  }
  if (!schema) throw ConfigError(origin + ": missing 'schema = " + std::string(kConfigSchema) + "'");
  if (*schema != kConfigSchema)
    throw ConfigError(origin + ": unsupported schema '" + *schema + "' (expected " + kConfigSchema + ")");
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const ConfigSection& Config::section(const std::string& name) const {
  const auto it = sections_.find(name);
  if (it == sections_.end()) throw ConfigError(origin_ + ": missing section [" + name + "]");
  touched_.insert(name);
  return it->second;
}

ConfigSection& Config::section(const std::string& name) {
  const auto it = sections_.find(name);
  if (it == sections_.end()) throw ConfigError(origin_ + ": missing section [" + name + "]");
  touched_.insert(name);
  return it->second;
}

std::vector<std::string> Config::section_names() const {
  std::vector<std::string> out;
  for (const auto& [name, s] : sections_) out.push_back(name);
  return out;
}

void Config::finish() const {
  for (const auto& [name, s] : sections_) {
    if (!touched_.count(name))
      throw ConfigError(origin_ + ":" + std::to_string(s.line()) + ": unknown section [" + name + "]");
    try {
      s.finish();
    } catch (const ConfigError& e) {
      throw ConfigError(origin_ + ":" + e.what());
    }
  }
}

void Config::override_value(const std::string& path, const std::string& value) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos) throw ConfigError("override path '" + path + "' must look like section.key");
  const std::string sec = path.substr(0, dot);
  const std::string key = path.substr(dot + 1);
  auto it = sections_.find(sec);
  if (it == sections_.end()) throw ConfigError("override path '" + path + "': no section [" + sec + "]");
  auto entries = it->second.entries();
  ConfigSection replaced(sec, it->second.line());
  bool found = false;
  for (auto& [k, e] : entries) {
    if (k == key) {
      e.value = value;
      found = true;
    }
    replaced.set(k, e.value, e.line);
  }
  if (!found) replaced.set(key, value, 0);
  it->second = std::move(replaced);
}

std::string Config::dump() const {
  std::string out = std::string("schema = ") + kConfigSchema + "\n";
  for (const auto& [name, s] : sections_) {
    out += "\n[" + name + "]\n";
    for (const auto& [key, e] : s.entries()) out += key + " = " + e.value + "\n";
  }
  return out;
}

Partition partition_from_config(const ConfigSection& section) {
  return Partition::two_cell(section.get_double("split", 0.5));
}

TopologicalSystem system_from_config(const ConfigSection& s) {
  const std::string kind = s.get_string("kind");
  if (kind == "rotation") return CircleRotation{s.get_angle("angle"), partition_from_config(s)};
  if (kind == "golden_mean") return SubshiftSFT::golden_mean();
  if (kind == "full_shift") return SubshiftSFT::full_shift(s.get_u64("alphabet", 2));
  if (kind == "fixed_point") return SubshiftSFT::fixed_point(static_cast<Symbol>(s.get_u64("symbol", 0)));
  if (kind == "sft") {
    const auto m = s.get_matrix("adjacency");
    std::vector<std::vector<bool>> adj;
    for (const auto& row : m) {
      std::vector<bool> r;
      for (double v : row) {
        if (v != 0.0 && v != 1.0) throw ConfigError("[" + s.name() + "] adjacency entries must be 0 or 1");
        r.push_back(v == 1.0);
      }
      adj.push_back(std::move(r));
    }
    return SubshiftSFT(adj.size(), std::move(adj));
  }
  if (kind == "identity") return IdentityOnParams{s.get_double("lo"), s.get_double("hi")};
  if (kind == "fiber") return FiberProduct{s.get_double("lo", 0.0), s.get_double("hi", 0.5), partition_from_config(s)};
  throw ConfigError("[" + s.name() + "] unknown system kind '" + kind +
                    "' (known: rotation, golden_mean, full_shift, fixed_point, sft, identity, fiber)");
}

ObservationSource source_from_config(const Config& config, const std::string& section_name, std::uint64_t seed) {
  const ConfigSection& s = config.section(section_name);
  const std::string kind = s.get_string("kind");
  if (kind == "markov") return {MarkovChain{s.get_matrix("transition")}, seed};
  if (kind == "iid_binary") return {IIDBinary{s.get_double("prob")}, seed};
  if (kind == "rotation_orbit") {
    RotationOrbit r{s.get_angle("angle"), std::nullopt};
    if (const auto init = s.find_string("init"); init && *init != "uniform") {
      double v;
      if (!parse_double(*init, v)) throw ConfigError("[" + s.name() + "] init must be a number or 'uniform'");
      r.init = v;
    }
    return {r, seed};
  }
  if (kind == "noisy_label") {
    const std::string base_name = s.get_string("base");
    if (base_name == section_name) throw ConfigError("[" + s.name() + "] noisy_label base cannot be itself");
    auto base = std::make_shared<const ObservationSource>(source_from_config(config, base_name, seed));
    return {NoisyLabelChannel{std::move(base), s.get_double("flip"), partition_from_config(s)}, seed};
  }
  if (kind == "gaussian") return {IIDGaussian{s.get_double("mean", 0.0), s.get_double("sd", 1.0)}, seed};
  if (kind == "signed_coin") return {SignedCoin{}, seed};
  throw ConfigError("[" + s.name() + "] unknown source kind '" + kind +
                    "' (known: markov, iid_binary, rotation_orbit, noisy_label, gaussian, signed_coin)");
}

CostFunction cost_from_config(const ConfigSection& s) {
  const std::string kind = s.get_string("kind");
  if (kind == "hamming") return HammingOnLabels{};
  if (kind == "table") return TabulatedCost(s.get_matrix("values"));
  throw ConfigError("[" + s.name() + "] unknown cost kind '" + kind + "' (known: hamming, table)");
}

}  // namespace ergtrack
