/*
 * Copyright 2026 The sttsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file config.hpp
 * @brief Strict YAML reading: typed lookups, unknown-key rejection and
 *        line-tagged diagnostics.
 */

#pragma once

#include <yaml-cpp/yaml.h>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sttsim/error.hpp"

namespace sttsim::config {

/// Parses a YAML document; syntax errors become ConfigError with the line.
YAML::Node parse_yaml(const std::string& text, const std::string& source);
YAML::Node load_yaml_file(const std::string& path);

/// Applies `a.b.c=value` to a document, creating intermediate maps. The value
/// is parsed as a YAML scalar or flow sequence.
void apply_override(YAML::Node& root, const std::string& assignment);

/// A mapping whose keys must all be consumed before finish().
class Section {
 public:
  Section(YAML::Node node, std::string source, std::string path = {});

  bool has(const std::string& key) const;

  template <class T>
  T get(const std::string& key, const T& fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    return require<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    YAML::Node v = at(key);
    if (!v) fail("missing required key '" + qualified(key) + "'", node_);
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail("key '" + qualified(key) + "' has the wrong type", v);
    }
  }

  template <class T>
  std::vector<T> get_list(const std::string& key, const std::vector<T>& fallback) {
    if (!has(key)) {
      used_.insert(key);
      return fallback;
    }
    used_.insert(key);
    YAML::Node v = at(key);
    if (v.IsScalar()) return {get_scalar<T>(key, v)};
    if (!v.IsSequence()) fail("key '" + qualified(key) + "' must be a list", v);
    std::vector<T> out;
    for (const auto& item : v) out.push_back(get_scalar<T>(key, item));
    return out;
  }

  /// Nested mapping, or nullopt when the key is absent.
  std::optional<Section> child(const std::string& key);
  /// Sequence of mappings.
  std::vector<Section> children(const std::string& key);

  /// Raw node for a key; marks it consumed.
  YAML::Node raw(const std::string& key);

  /// Throws ConfigError naming the first unrecognised key.
  void finish() const;

  [[noreturn]] void fail(const std::string& what, const YAML::Node& at) const;
  [[noreturn]] void fail_key(const std::string& key, const std::string& what) const;

  const std::string& source() const { return source_; }
  const YAML::Node& node() const { return node_; }

 private:
  // Const lookup so that probing a missing key never inserts it.
  YAML::Node at(const std::string& key) const {
    const YAML::Node& n = node_;
    return n[key];
  }

  template <class T>
  T get_scalar(const std::string& key, const YAML::Node& v) const {
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      fail("key '" + qualified(key) + "' has an element of the wrong type", v);
    }
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string source_;
  std::string path_;
  std::set<std::string> used_;
};

/// 1-based line of a node, 0 when unknown.
int line_of(const YAML::Node& node);

}  // namespace sttsim::config
