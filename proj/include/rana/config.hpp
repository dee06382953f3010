#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rana/error.hpp"
#include "rana/graph.hpp"

namespace rana {

/// Flat key-value configuration in a small TOML subset:
///
///     # comment
///     budget = 100
///     strategy = "rana"
///     seeds = [1, 2, 3]
///     [sweep]
///     alpha = [0.7, 0.8]
///
/// Keys inside a [section] are stored as "section.key". Every value is kept as
/// a list of string items; scalars are one-item lists.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text) {
    ConfigFile cfg;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view line = detail::trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header at line " + std::to_string(line_no));
        section = std::string(detail::trim(line.substr(1, line.size() - 2)));
        if (section.empty()) throw ConfigError("empty section name at line " + std::to_string(line_no));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected key = value at line " + std::to_string(line_no));
      const std::string key(detail::trim(line.substr(0, eq)));
      if (key.empty()) throw ConfigError("missing key at line " + std::to_string(line_no));
      const std::string full = section.empty() ? key : section + "." + key;
      if (cfg.values_.contains(full)) throw ConfigError("duplicate key '" + full + "' at line " + std::to_string(line_no));
      cfg.values_[full] = parse_value(detail::trim(line.substr(eq + 1)), line_no);
    }
    return cfg;
  }

  static ConfigFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  bool has(const std::string& key) const { return values_.contains(key); }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
  }

  const std::vector<std::string>& items(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
  }

  std::string get_string(const std::string& key) const { return scalar(key); }

  double get_double(const std::string& key) const { return to_double(key, scalar(key)); }

  long long get_int(const std::string& key) const { return to_int(key, scalar(key)); }

  bool get_bool(const std::string& key) const {
    const auto s = scalar(key);
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError("key '" + key + "' expects true or false, got '" + s + "'");
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : items(key)) out.push_back(to_double(key, s));
    return out;
  }

  std::vector<long long> get_ints(const std::string& key) const {
    std::vector<long long> out;
    for (const auto& s : items(key)) out.push_back(to_int(key, s));
    return out;
  }

  /// Throws on any key outside `known`, so typos do not pass silently.
  void require_known(const std::set<std::string>& known) const {
    for (const auto& [k, v] : values_) {
      if (!known.contains(k)) throw ConfigError("unknown config key '" + k + "'");
    }
  }

 private:
  static std::string_view strip_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
  }

  static std::string unquote(std::string_view s, std::size_t line_no) {
    if (!s.empty() && s.front() == '"') {
      if (s.size() < 2 || s.back() != '"') throw ConfigError("unterminated string at line " + std::to_string(line_no));
      return std::string(s.substr(1, s.size() - 2));
    }
    return std::string(s);
  }

  static std::vector<std::string> parse_value(std::string_view v, std::size_t line_no) {
    if (v.empty()) throw ConfigError("missing value at line " + std::to_string(line_no));
    if (v.front() != '[') return {unquote(v, line_no)};
    if (v.back() != ']') throw ConfigError("unterminated list at line " + std::to_string(line_no));
    std::vector<std::string> out;
    std::string_view body = detail::trim(v.substr(1, v.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = detail::trim(body.substr(0, comma));
      if (item.empty()) throw ConfigError("empty list item at line " + std::to_string(line_no));
      out.push_back(unquote(item, line_no));
      if (comma == std::string_view::npos) break;
      body = detail::trim(body.substr(comma + 1));
      if (body.empty()) break;  // trailing comma
    }
    return out;
  }

  std::string scalar(const std::string& key) const {
    const auto& v = items(key);
    if (v.size() != 1) throw ConfigError("key '" + key + "' expects a single value");
    return v.front();
  }

  static double to_double(const std::string& key, const std::string& s) {
    if (auto v = detail::parse_real(s)) return *v;
    throw ConfigError("key '" + key + "' expects a number, got '" + s + "'");
  }

  static long long to_int(const std::string& key, const std::string& s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ConfigError("key '" + key + "' expects an integer, got '" + s + "'");
    }
    return v;
  }

  std::map<std::string, std::vector<std::string>> values_;
};

}  // namespace rana
