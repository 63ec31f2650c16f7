#include "oneside/harness/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "oneside/error.hpp"

namespace oneside::harness {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

double to_double(std::string_view text, const std::string& key) {
  const std::string s(trim(text));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    fail("key '" + key + "': '" + s + "' is not a number");
  }
  if (used != s.size()) fail("key '" + key + "': '" + s + "' is not a number");
  return v;
}

std::uint64_t to_u64(std::string_view text, const std::string& key) {
  const auto s = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail("key '" + key + "': '" + std::string(s) + "' is not a non-negative integer");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) {
        s = s.substr(0, i);
        break;
      }
    }
    s = trim(s);
    if (s.empty()) continue;
    const auto where = source + ":" + std::to_string(lineno);
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) fail(where + ": expected key = value");
    const std::string key(trim(s.substr(0, eq)));
    std::string_view value = trim(s.substr(eq + 1));
    if (key.empty()) fail(where + ": empty key");
    for (char ch : key) {
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_')) {
        fail(where + ": bad character in key '" + key + "'");
      }
    }
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') fail(where + ": unterminated string");
      value = value.substr(1, value.size() - 2);
    }
    if (cfg.entries_.count(key)) fail(where + ": duplicate key '" + key + "'");
    cfg.entries_[key] = std::string(value);
  }
  if (!cfg.has("schema_version")) fail(source + ": missing schema_version");
  const auto version = to_u64(cfg.entries_["schema_version"], "schema_version");
  if (version != static_cast<std::uint64_t>(kSchemaVersion)) {
    fail(source + ": unsupported schema_version " + std::to_string(version));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::string Config::raw(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) fail("missing key '" + key + "'");
  return it->second;
}

std::string Config::str(const std::string& key) const { return raw(key); }

std::string Config::str(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double Config::num(const std::string& key) const { return to_double(raw(key), key); }

double Config::num(const std::string& key, double fallback) const {
  return has(key) ? num(key) : fallback;
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? to_u64(raw(key), key) : fallback;
}

std::size_t Config::size(const std::string& key, std::size_t fallback) const {
  return static_cast<std::size_t>(u64(key, fallback));
}

std::vector<double> Config::nums(const std::string& key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (auto part : split(raw(key))) out.push_back(to_double(part, key));
  return out;
}

std::vector<std::size_t> Config::sizes(const std::string& key, std::vector<std::size_t> fallback) const {
  if (!has(key)) return fallback;
  std::vector<std::size_t> out;
  for (auto part : split(raw(key))) out.push_back(static_cast<std::size_t>(to_u64(part, key)));
  return out;
}

LaplaceExponent make_symbol(const Config& cfg) {
  const auto kind = cfg.str("symbol.kind", "stable");
  const double alpha = cfg.num("symbol.alpha", 1.5);
  try {
    if (kind == "stable") return LaplaceExponent::stable(alpha);
    if (kind == "tempered") return LaplaceExponent::tempered_stable(alpha, cfg.num("symbol.lambda"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidSpec) fail(std::string("symbol: ") + e.what());
    throw;
  }
  fail("symbol.kind must be stable or tempered, got '" + kind + "'");
}

BoundaryPair make_boundary(const Config& cfg) {
  const auto label = cfg.str("boundary", "DD");
  try {
    return BoundaryPair::parse(label);
  } catch (const Error&) {
    fail("boundary: unknown pair '" + label + "'");
  }
}

}  // namespace oneside::harness
