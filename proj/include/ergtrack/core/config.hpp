#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ergtrack/core/cost.hpp"
#include "ergtrack/core/source.hpp"
#include "ergtrack/core/system.hpp"

namespace ergtrack {

inline constexpr const char* kConfigSchema = "ergtrack-config/1";

/// One `[name]` block of a config file.
///
/// Every read marks the key as used; finish() rejects keys nobody asked for,
/// so a typo in a field name is an error instead of a silently ignored value.
class ConfigSection {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  ConfigSection() = default;
  ConfigSection(std::string name, int line) : name_(std::move(name)), line_(line) {}

  const std::string& name() const noexcept { return name_; }
  int line() const noexcept { return line_; }

  void set(const std::string& key, std::string value, int line);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::optional<std::string> find_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::uint64_t> get_u64s(const std::string& key) const;
  /// Rows separated by ';', entries by whitespace or ','.
  std::vector<std::vector<double>> get_matrix(const std::string& key) const;
  Angle get_angle(const std::string& key) const;

  /// Throws ConfigError naming the first unused key and its line.
  void finish() const;

  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

 private:
  const Entry& require(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::string name_;
  int line_ = 0;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

/// Parsed config: a mandatory `schema = ergtrack-config/1` line and named sections.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  const std::string& origin() const noexcept { return origin_; }
  const std::string& text() const noexcept { return text_; }

  bool has(const std::string& section) const { return sections_.count(section) != 0; }
  const ConfigSection& section(const std::string& name) const;
  ConfigSection& section(const std::string& name);
  std::vector<std::string> section_names() const;

  /// Throws ConfigError if a section was never consulted or has unused keys.
  void finish() const;

  /// Overwrites a scalar field (used by sweeps). `path` is "section.key".
  void override_value(const std::string& path, const std::string& value);

  /// Serialises back to the text format (sections and keys sorted).
  std::string dump() const;

 private:
  std::string origin_;
  std::string text_;
  std::map<std::string, ConfigSection> sections_;
  mutable std::set<std::string> touched_;
};

/// Builds a system from a section with `kind = rotation | sft | golden_mean | full_shift |
/// fixed_point | identity | fiber`.
TopologicalSystem system_from_config(const ConfigSection& section);
/// Builds a source from a section with `kind = markov | iid_binary | rotation_orbit |
/// noisy_label | gaussian | signed_coin`. noisy_label reads its base from `base_section`.
ObservationSource source_from_config(const Config& config, const std::string& section_name, std::uint64_t seed);
/// `kind = hamming | table`; table rows in `values`.
CostFunction cost_from_config(const ConfigSection& section);
Partition partition_from_config(const ConfigSection& section);

}  // namespace ergtrack
