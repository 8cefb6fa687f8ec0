// Copyright 2026 The plsmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "plsmc/errors.hpp"

namespace plsmc {

// INI-style run configuration: [section] headers over key = value lines.
// Lookups are strict -- a typo in a key name is a hard error, reported by
// Section::finish() once the consumer has read everything it understands.
class Section {
 public:
  explicit Section(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  void insert(const std::string& key, const std::string& value) {
    for (const auto& kv : entries_)
      if (kv.first == key)
        throw ConfigError("duplicate key '" + key + "' in [" + name_ + "]");
    entries_.emplace_back(key, value);
  }

  bool has(const std::string& key) const {
    for (const auto& kv : entries_)
      if (kv.first == key) return true;
    return false;
  }

  std::string get_string(const std::string& key) const {
    for (const auto& kv : entries_)
      if (kv.first == key) {
        consumed_.insert(key);
        return kv.second;
      }
    throw ConfigError("missing key '" + key + "' in [" + name_ + "]");
  }

  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key) const {
    return to_double(key, get_string(key));
  }

  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  std::uint64_t get_u64(const std::string& key) const {
    return to_u64(key, get_string(key));
  }

  std::uint64_t get_u64_or(const std::string& key,
                           std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
  }

  bool get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "' in [" + name_ +
                      "]: expected a boolean, got '" + v + "'");
  }

  bool get_bool_or(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
  }

  // Reject any keys the consumer never asked for.
  void finish() const {
    for (const auto& kv : entries_)
      if (!consumed_.count(kv.first))
        throw ConfigError("unknown key '" + kv.first + "' in [" + name_ + "]");
  }

 private:
  double to_double(const std::string& key, const std::string& v) const {
    const char* begin = v.c_str();
    char* end = nullptr;
    const double out = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
      throw ConfigError("key '" + key + "' in [" + name_ +
                        "]: expected a number, got '" + v + "'");
    return out;
  }

  std::uint64_t to_u64(const std::string& key, const std::string& v) const {
    const char* begin = v.c_str();
    char* end = nullptr;
    if (!v.empty() && v.front() == '-')
      throw ConfigError("key '" + key + "' in [" + name_ +
                        "]: expected a non-negative integer, got '" + v + "'");
    const unsigned long long out = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0')
      throw ConfigError("key '" + key + "' in [" + name_ +
                        "]: expected a non-negative integer, got '" + v + "'");
    return static_cast<std::uint64_t>(out);
  }

  std::string name_;
  std::vector<std::pair<std::string, std::string>> entries_;
  mutable std::set<std::string> consumed_;
};

struct ConfigFile {
  std::vector<Section> sections;

  bool has(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name() == name) return true;
    return false;
  }

  const Section& require(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name() == name) return s;
    throw ConfigError("missing section [" + name + "]");
  }

  // All sections whose name starts with `prefix`, in file order
  // (used for repeated blocks like [filter1], [filter2], ...).
  std::vector<const Section*> with_prefix(const std::string& prefix) const {
    std::vector<const Section*> out;
    for (const auto& s : sections)
      if (s.name().rfind(prefix, 0) == 0) out.push_back(&s);
    return out;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline ConfigFile parse_config_text(const std::string& text,
                                    const std::string& origin = "<string>") {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = detail::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const std::string where =
        origin + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError(where + "malformed section header '" + line + "'");
      const std::string name = detail::trim(line.substr(1, line.size() - 2));
      if (name.empty())
        throw ConfigError(where + "empty section name");
      if (cfg.has(name))
        throw ConfigError(where + "duplicate section [" + name + "]");
      cfg.sections.emplace_back(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (cfg.sections.empty())
      throw ConfigError(where + "key '" + key + "' appears before any section");
    cfg.sections.back().insert(key, value);
  }
  return cfg;
}

inline ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace plsmc
