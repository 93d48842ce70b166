#include "qmeas/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qmeas {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return true;
}

}  // namespace

double parse_double(const std::string& text, int line) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("expected a number, got an empty value", line);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError("expected a finite number, got '" + t + "'", line);
  return v;
}

std::vector<double> parse_list(const std::string& text, int line) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, line));
  if (out.empty()) throw ConfigError("expected a comma-separated list of numbers", line);
  return out;
}

Config Config::parse(const std::string& text) {
  Config c;
  c.sections_[""];
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
      current = trim(s.substr(1, s.size() - 2));
      if (!valid_name(current)) throw ConfigError("invalid section name '" + current + "'", line);
      if (c.section_lines_.count(current)) throw ConfigError("duplicate section [" + current + "]", line);
      c.section_lines_[current] = line;
      c.sections_[current];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + s + "'", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!valid_name(key)) throw ConfigError("invalid key '" + key + "'", line);
    auto& sec = c.sections_[current];
    if (sec.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    sec[key] = Entry{value, line};
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto e = s->second.find(key);
  return e == s->second.end() ? nullptr : &e->second;
}

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

const Config::Section& Config::section(const std::string& name) const {
  static const Section empty;
  const auto s = sections_.find(name);
  return s == sections_.end() ? empty : s->second;
}

std::vector<std::string> Config::section_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : sections_) out.push_back(name);
  return out;
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  const Entry* e = find(section, key);
  return e ? parse_double(e->value, e->line) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  const double v = parse_double(e->value, e->line);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("expected an integer for '" + key + "'", e->line);
  return static_cast<int>(v);
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  const std::string t = trim(e->value);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("expected a nonnegative integer for '" + key + "'", e->line);
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError("integer out of range for '" + key + "'", e->line);
  return v;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  throw ConfigError("expected true or false for '" + key + "'", e->line);
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
  const Entry* e = find(section, key);
  return e ? parse_list(e->value, e->line) : fallback;
}

int Config::line_of(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  return e ? e->line : 0;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  auto& sec = sections_[section];
  auto it = sec.find(key);
  if (it == sec.end()) sec[key] = Entry{value, 0};
  else it->second.value = value;
}

void Config::require_known_keys(const std::string& section, const std::set<std::string>& known) const {
  for (const auto& [key, entry] : this->section(section))
    if (!known.count(key))
      throw ConfigError("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"), entry.line);
}

void Config::require_known_sections(const std::set<std::string>& known) const {
  for (const auto& [name, sec] : sections_) {
    if (name.empty() || known.count(name)) continue;
    const auto l = section_lines_.find(name);
    throw ConfigError("unknown section [" + name + "]", l == section_lines_.end() ? 0 : l->second);
  }
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [name, sec] : sections_)
    for (const auto& [key, e] : sec) out += (name.empty() ? "" : name + ".") + key + " = " + e.value + "\n";
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qmeas
