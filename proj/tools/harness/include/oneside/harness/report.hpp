#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace oneside::harness {

struct Metric {
  std::string name;
  double value_a = 0.0;
  double value_b = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  /// |a - b| <= tol, or |a - b| / |b| <= tol when `relative`.
  static Metric compare(std::string name, double a, double b, double tol, bool relative = false);
  /// value <= tol.
  static Metric bound(std::string name, double value, double tol);
  static Metric flag(std::string name, bool ok);
};

struct Report {
  std::string kind;
  std::string source;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<Metric> metrics;
  std::vector<std::string> files;
  std::vector<std::string> notes;
  std::uint64_t seed = 0;
  double wall_clock_s = 0.0;
  std::string bridge;
  std::string error;
  std::string error_code;

  bool passed() const;
};

nlohmann::json to_json(const Metric& m);
nlohmann::json to_json(const Report& r);

/// Rectangular table written as CSV (header row, 17 significant digits) or JSON.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
  /// Writes `<stem>.csv` or `<stem>.json` under dir; returns the file name.
  std::string save(const std::filesystem::path& dir, const std::string& stem, const std::string& format) const;
};

std::string format_double(double v);

}  // namespace oneside::harness
