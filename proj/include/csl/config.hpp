#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "csl/errors.hpp"

namespace csl {

/// Flat key-value configuration with `[section]` headers. Keys are exposed
/// as "section.key". `#` starts a comment; blank lines are ignored.
class Config {
public:
  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
  }

  static Config parse_text(const std::string& text) {
    Config cfg;
    cfg.text_ = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto pos = line.find('#'); pos != std::string::npos)
        line.erase(pos);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config line " + std::to_string(lineno) +
                            ": malformed section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty key");
      std::string full = section.empty() ? key : section + "." + key;
      if (cfg.values_.count(full))
        throw ConfigError("config: duplicate key '" + full + "'");
      cfg.values_[full] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback = {}) const {
    auto it = values_.find(key);
    used_.insert(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    used_.insert(key);
    if (it == values_.end()) return fallback;
    return to_double(key, it->second);
  }

  int get_int(const std::string& key, int fallback) const {
    auto it = values_.find(key);
    used_.insert(key);
    if (it == values_.end()) return fallback;
    try {
      size_t pos = 0;
      int v = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': invalid integer '" +
                        it->second + "'");
    }
  }

  std::vector<double> get_doubles(const std::string& key,
                                  std::vector<double> fallback = {}) const {
    auto it = values_.find(key);
    used_.insert(key);
    if (it == values_.end()) return fallback;
    std::istringstream ss(it->second);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(to_double(key, tok));
    if (out.empty())
      throw ConfigError("config key '" + key + "': empty list");
    return out;
  }

  /// Reject any key that was never read by the command handler.
  void reject_unknown() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k))
        throw ConfigError("config: unknown key '" + k + "'");
  }

  /// FNV-1a of the raw config text, for the CSV metadata line.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text_) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  }
  static double to_double(const std::string& key, const std::string& v) {
    try {
      size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': invalid number '" + v + "'");
    }
  }

  std::string text_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace csl
