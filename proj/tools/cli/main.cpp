#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "oneside/error.hpp"
#include "oneside/harness/config.hpp"
#include "oneside/harness/experiments.hpp"

namespace h = oneside::harness;

namespace {

void print_summary(const h::Report& r) {
  for (const auto& m : r.metrics) {
    std::printf("%s %s value=%s tol=%s\n", m.pass ? "PASS" : "FAIL", m.name.c_str(),
                h::format_double(m.abs_err).c_str(), h::format_double(m.tolerance).c_str());
  }
  for (const auto& n : r.notes) std::printf("  %s\n", n.c_str());
  if (!r.error.empty()) std::printf("ERROR %s\n", r.error.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oneside: boundary-modified rate matrices, path maps and scale functions"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out = "oneside-out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string format = "csv";
  app.add_option("--config", config_path, "experiment config file");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "RNG seed (overrides sim.seed)");
  app.add_option("--threads", threads, "worker threads (default: ONESIDE_LEVY_THREADS, then all cores)");
  app.add_option("--format", format, "data file format")->check(CLI::IsMember({"csv", "json"}));

  std::string suite_dir;
  for (const auto& kind : h::experiment_kinds()) {
    app.add_subcommand(kind, "run a " + kind + " experiment")->fallthrough();
  }
  auto* suite = app.add_subcommand("suite", "run every *.cfg in a directory")->fallthrough();
  suite->add_option("dir", suite_dir, "directory of configs")->required();

  CLI11_PARSE(app, argc, argv);

  h::RunOptions opts;
  opts.out = out;
  opts.seed = seed;
  opts.threads = threads;
  opts.format = format;

  try {
    if (suite->parsed()) {
      const auto result = h::run_suite(suite_dir, opts);
      for (const auto& r : result.reports) {
        std::printf("== %s (%s): %s\n", r.source.c_str(), r.kind.c_str(), r.passed() ? "pass" : "fail");
        print_summary(r);
      }
      return result.status;
    }
    const std::string kind = app.get_subcommands().front()->get_name();
    auto cfg = config_path.empty() ? h::Config::parse("schema_version = 1", "<defaults>") : h::Config::load(config_path);
    if (cfg.has("kind") && cfg.str("kind") != kind) {
      throw oneside::Error(oneside::ErrorCode::ConfigError,
                           "config kind '" + cfg.str("kind") + "' does not match subcommand '" + kind + "'");
    }
    cfg.set("kind", kind);
    const auto report = h::run_experiment(cfg, opts);
    print_summary(report);
    std::printf("report: %s\n", (opts.out / "report.json").string().c_str());
    return h::exit_status(report);
  } catch (const oneside::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == oneside::ErrorCode::ConfigError ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
