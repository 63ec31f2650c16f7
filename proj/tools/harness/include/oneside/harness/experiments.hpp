#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oneside/harness/config.hpp"
#include "oneside/harness/report.hpp"

namespace oneside::harness {

/// Settings from the command line; they override the config file.
struct RunOptions {
  std::filesystem::path out = "oneside-out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;  ///< 0: ONESIDE_LEVY_THREADS, then hardware
  std::string format = "csv";
};

const std::vector<std::string>& experiment_kinds();

/// Runs one experiment. Data files go to opts.out, the report to
/// opts.out/report.json. Config errors propagate as Error(ConfigError);
/// numerical failures are recorded in the report.
Report run_experiment(const Config& cfg, const RunOptions& opts);

/// 0 pass, 1 failed metric, 3 numerical failure.
int exit_status(const Report& r);

struct SuiteResult {
  std::vector<Report> reports;
  int status = 0;
};

/// Runs every *.cfg file of a directory in name order; each one writes to
/// opts.out/<stem>. The aggregate goes to opts.out/suite.json.
SuiteResult run_suite(const std::filesystem::path& dir, const RunOptions& opts);

}  // namespace oneside::harness
