#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace put {

// Full-precision decimal text that round-trips a double.
std::string fmt_double(double v);

// Writes content to path via temp file + rename.
void atomic_write(const std::string& path, const std::string& content);

std::vector<std::string> split_csv_line(const std::string& line);

// Flat key=value config with optional [section] headers ("section.key") and
// '#' comments.
struct Config {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double def) const;
  int get_int(const std::string& key) const;
  int get_int_or(const std::string& key, int def) const;

  // Canonical text used for provenance hashing.
  std::string canonical() const;
  uint64_t hash() const;
};

Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);

uint64_t fnv1a(const std::string& s);

// Error type for bad user configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace put
