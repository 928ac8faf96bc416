#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ergtrack/core/config.hpp"
#include "ergtrack/core/parallel.hpp"

namespace ergtrack::experiments {

inline constexpr const char* kThreadsEnv = "ERGTRACK_THREADS";

/// One `[checks]` entry: `<metric>_min`, `<metric>_max` or `<metric>_eq`.
struct CheckResult {
  std::string name;
  std::string metric;
  std::string op;  ///< ">=", "<=" or "=="
  double bound = 0.0;
  double value = 0.0;
  bool pass = false;
};

struct RunManifest {
  std::string kind;
  std::string name;
  std::string config_hash;  ///< FNV-1a of the canonical config text, hex
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  std::vector<std::string> outputs;  ///< relative to out_dir
  double wall_seconds = 0.0;
  std::map<std::string, double> metrics;
  std::vector<CheckResult> checks;
  std::vector<RunManifest> children;  ///< suite members

  bool passed() const;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  ///< replaces [experiment] seed
  std::filesystem::path out = "out";
  Execution exec;
  /// When set, the config's kind must equal it (subcommands other than `run`).
  std::optional<std::string> expected_kind;
};

std::vector<std::string> registered_kinds();

/// Executes one experiment, writing its CSVs, plots and manifest.json under options.out.
RunManifest run(Config config, const RunOptions& options);
RunManifest run_file(const std::string& path, const RunOptions& options);

/// One run per value of the numeric field `axis` ("section.key"), each in its own
/// subdirectory with a seed split from the base seed, then summary.csv.
std::vector<RunManifest> sweep(const Config& config, const std::string& axis, const std::vector<std::string>& values,
                               const RunOptions& options);

/// Threads from the flag, else from the environment variable, else 1.
unsigned resolve_threads(std::optional<unsigned> flag);

/// %.17g; round-trips every double.
std::string format_double(double value);
std::string fnv1a_hex(const std::string& text);

/// Minimal SVG polyline plot.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<std::pair<double, double>>& points, bool log_x, bool log_y);

struct SuperadditivityRow {
  std::size_t instance = 0;
  std::string reference;
  std::string source;
  std::size_t m = 0;
  std::size_t n = 0;
  double whole = 0.0;
  double head = 0.0;
  double tail = 0.0;
  double slack = 0.0;
  bool holds = false;
};

/// Seeded random superadditivity instances: golden-mean or full-shift reference, Hamming
/// cost, i.i.d. or Markov binary source, 1 <= m, n <= max_len.
std::vector<SuperadditivityRow> superadditivity_instances(std::uint64_t seed, std::size_t count, std::size_t max_len);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace ergtrack::experiments
