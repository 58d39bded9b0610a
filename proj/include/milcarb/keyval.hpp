#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace milcarb {

// Flat key = value files; '#' starts a comment, blank lines ignored.
// Used for schema maps, calibration config, and scenario files.
class KeyValueFile {
 public:
  KeyValueFile() = default;
  static KeyValueFile load(const std::string& path);
  static KeyValueFile parse(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws ConfigError
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int_or(const std::string& key, int fallback) const;
  std::optional<double> maybe_double(const std::string& key) const;
  // Semicolon-separated list, entries trimmed.
  std::vector<std::string> get_list_or(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  std::string origin_;
};

}  // namespace milcarb
