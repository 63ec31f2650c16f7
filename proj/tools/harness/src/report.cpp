#include "oneside/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "oneside/error.hpp"

namespace oneside::harness {

Metric Metric::compare(std::string name, double a, double b, double tol, bool relative) {
  Metric m;
  m.name = std::move(name);
  m.value_a = a;
  m.value_b = b;
  m.abs_err = std::abs(a - b);
  m.rel_err = b != 0.0 ? m.abs_err / std::abs(b) : m.abs_err;
  m.tolerance = tol;
  m.pass = (relative ? m.rel_err : m.abs_err) <= tol;
  return m;
}

Metric Metric::bound(std::string name, double value, double tol) {
  Metric m;
  m.name = std::move(name);
  m.value_a = value;
  m.abs_err = value;
  m.rel_err = value;
  m.tolerance = tol;
  m.pass = value <= tol;
  return m;
}

Metric Metric::flag(std::string name, bool ok) {
  Metric m;
  m.name = std::move(name);
  m.value_a = ok ? 1.0 : 0.0;
  m.value_b = 1.0;
  m.abs_err = ok ? 0.0 : 1.0;
  m.rel_err = m.abs_err;
  m.pass = ok;
  return m;
}

bool Report::passed() const {
  if (!error.empty()) return false;
  for (const auto& m : metrics) {
    if (!m.pass) return false;
  }
  return true;
}

namespace {

// NaN and infinities have no JSON literal
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

nlohmann::json to_json(const Metric& m) {
  return {{"name", m.name},          {"value_a", number(m.value_a)}, {"value_b", number(m.value_b)},
          {"abs_err", number(m.abs_err)}, {"rel_err", number(m.rel_err)}, {"tolerance", number(m.tolerance)},
          {"pass", m.pass}};
}

nlohmann::json to_json(const Report& r) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : r.metrics) metrics.push_back(to_json(m));
  nlohmann::json j = {{"kind", r.kind},
                      {"source", r.source},
                      {"pass", r.passed()},
                      {"seed", r.seed},
                      {"params", params},
                      {"coordinate_bridge", r.bridge},
                      {"metrics", metrics},
                      {"files", r.files},
                      {"notes", r.notes},
                      {"wall_clock_s", r.wall_clock_s}};
  if (!r.error.empty()) j["error"] = {{"code", r.error_code}, {"message", r.error}};
  return j;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\r\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << "\r\n";
  }
}

nlohmann::json Table::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r = nlohmann::json::array();
    for (double v : row) r.push_back(number(v));
    rows_json.push_back(std::move(r));
  }
  return {{"columns", header}, {"rows", rows_json}};
}

std::string Table::save(const std::filesystem::path& dir, const std::string& stem,
                        const std::string& format) const {
  const std::string name = stem + (format == "json" ? ".json" : ".csv");
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + (dir / name).string());
  if (format == "json") {
    out << to_json().dump(1) << "\n";
  } else {
    write_csv(out);
  }
  return name;
}

}  // namespace oneside::harness
