#ifndef ADINAV_KEY_VALUE_HPP
#define ADINAV_KEY_VALUE_HPP

// Plain "key = value" text configuration. '#' starts a comment; blank lines
// are ignored; later keys override earlier ones.

#include "adinav/common.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adinav {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  /// Throws MalformedFile (line without '=' or with an empty key).
  static KeyValueConfig parse(std::string_view text, std::string_view origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  /// Throws MissingField.
  const std::string& get(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  /// Throw MalformedNumber / MissingField.
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Whitespace-separated numbers.
  std::vector<double> get_doubles(const std::string& key) const;

  /// Keys not in `known`, for typo warnings.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
};

/// Strict whole-token number parse. Throws MalformedNumber.
double parse_double(std::string_view token, std::string_view context = {});
std::vector<double> parse_doubles(std::string_view text, std::string_view context = {});

std::string_view trim(std::string_view s);

}  // namespace adinav

#endif  // ADINAV_KEY_VALUE_HPP
