#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "oneside/ratemat.hpp"
#include "oneside/symbol.hpp"

namespace oneside::harness {

inline constexpr int kSchemaVersion = 1;

/// Flat `key = value` text with dotted keys.
///
/// Blank lines and `#` comments are ignored. Values may be double quoted.
/// Lists are comma separated. `schema_version` is required.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& source = "<memory>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }

  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  double num(const std::string& key) const;
  double num(const std::string& key, double fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  std::size_t size(const std::string& key, std::size_t fallback) const;
  std::vector<double> nums(const std::string& key, std::vector<double> fallback = {}) const;
  std::vector<std::size_t> sizes(const std::string& key, std::vector<std::size_t> fallback = {}) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::string raw(const std::string& key) const;

  std::map<std::string, std::string> entries_;
  std::string source_;
};

/// symbol.kind = stable | tempered, with symbol.alpha and symbol.lambda.
LaplaceExponent make_symbol(const Config& cfg);
BoundaryPair make_boundary(const Config& cfg);

}  // namespace oneside::harness
