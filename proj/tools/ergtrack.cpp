#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ergtrack/core/error.hpp"
#include "ergtrack/experiments/experiments.hpp"

namespace ex = ergtrack::experiments;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "replace the config seed");
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--threads", c.threads, "worker threads (default: $ERGTRACK_THREADS or 1)");
}

ex::RunOptions options_from(const Common& c) {
  ex::RunOptions o;
  o.seed = c.seed;
  o.out = c.out;
  o.exec.threads = ex::resolve_threads(c.threads);
  return o;
}

void report(const ex::RunManifest& m, const std::string& indent = "") {
  std::cout << indent << m.name << " (" << m.kind << ") -> " << (m.out_dir / "manifest.json").string() << '\n';
  for (const auto& c : m.checks) {
    std::cout << indent << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << ex::format_double(c.value) << ' '
              << c.op << ' ' << ex::format_double(c.bound) << '\n';
  }
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal tracking, joining LPs and quantized identification experiments"};
  app.require_subcommand(1);

  const std::vector<std::string> kinds{"track", "joinlp", "quantid", "complexity", "mle"};
  std::vector<Common> per_kind(kinds.size());
  std::vector<CLI::App*> kind_cmds;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    auto* cmd = app.add_subcommand(kinds[i], "run a " + kinds[i] + " experiment config");
    add_common(cmd, per_kind[i]);
    kind_cmds.push_back(cmd);
  }
  Common run_opts;
  auto* run_cmd = app.add_subcommand("run", "run any experiment or suite config");
  add_common(run_cmd, run_opts);

  Common sweep_opts;
  std::string axis;
  std::string values;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a config once per value of a numeric field");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--axis", axis, "field to vary, as section.key")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    bool ok = true;
    if (*sweep_cmd) {
      const auto manifests = ex::sweep(ergtrack::Config::load(sweep_opts.config), axis, split_values(values),
                                       options_from(sweep_opts));
      for (const auto& m : manifests) {
        report(m);
        ok = ok && m.passed();
      }
      std::cout << "summary -> " << (std::filesystem::path(sweep_opts.out) / "summary.csv").string() << '\n';
    } else {
      ex::RunManifest m;
      if (*run_cmd) {
        m = ex::run_file(run_opts.config, options_from(run_opts));
      } else {
        for (std::size_t i = 0; i < kinds.size(); ++i) {
          if (!*kind_cmds[i]) continue;
          auto o = options_from(per_kind[i]);
          o.expected_kind = kinds[i];
          m = ex::run_file(per_kind[i].config, o);
        }
      }
      report(m);
      for (const auto& child : m.children) report(child, "  ");
      ok = m.passed();
    }
    std::cout << (ok ? "all checks passed" : "some checks failed") << '\n';
    return ok ? 0 : 1;
  } catch (const ergtrack::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
