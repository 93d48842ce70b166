#pragma once

// Flat key/value configuration with optional [section] headers:
//
//   # comment
//   units = natural
//   experiment = stern_gerlach
//   [stern_gerlach]
//   scale = 2
//
// Keys before the first header belong to the unnamed top section. Every error carries its line.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qmeas/errors.hpp"

namespace qmeas {

class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;  // 0 for values set programmatically
  };
  using Section = std::map<std::string, Entry>;

  static Config parse(const std::string& text);
  /// Throws ConfigError if the file cannot be read.
  static Config load(const std::string& path);

  bool has_section(const std::string& section) const { return sections_.count(section) > 0; }
  bool has(const std::string& section, const std::string& key) const;
  const Section& section(const std::string& name) const;
  std::vector<std::string> section_names() const;

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  /// Comma-separated numbers.
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;

  /// Line of an entry (0 if absent or set programmatically).
  int line_of(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Throws ConfigError naming the first key of `section` outside `known`.
  void require_known_keys(const std::string& section, const std::set<std::string>& known) const;
  /// Throws ConfigError naming the first section outside `known`.
  void require_known_sections(const std::set<std::string>& known) const;

  /// Sorted "section.key = value" lines; the basis of the config hash.
  std::string canonical() const;

 private:
  const Entry* find(const std::string& section, const std::string& key) const;
  std::map<std::string, Section> sections_;
  std::map<std::string, int> section_lines_;
};

/// Strict number parsing; throws ConfigError with `line` on failure.
double parse_double(const std::string& text, int line);
std::vector<double> parse_list(const std::string& text, int line);

/// 64-bit FNV-1a of a string, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace qmeas
