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

#include "sttsim/config.hpp"

#include <fstream>
#include <sstream>

namespace sttsim::config {

int line_of(const YAML::Node& node) {
  if (!node) return 0;
  const auto mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

YAML::Node parse_yaml(const std::string& text, const std::string& source) {
  try {
    YAML::Node root = YAML::Load(text);
    if (!root || root.IsNull()) return YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError("top level must be a mapping", source, line_of(root));
    return root;
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, source, e.mark.line + 1);
  }
}

YAML::Node load_yaml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_yaml(ss.str(), path);
}

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key=value", "--set");
  }
  const std::string path = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("override value for '" + path + "': " + e.msg, "--set");
  }
  std::vector<std::string> parts;
  for (std::size_t start = 0;;) {
    const auto dot = path.find('.', start);
    parts.push_back(path.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  // yaml-cpp nodes are handles, so walking by reassignment would rebind them;
  // collect the chain first and write through the last handle.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (!next.IsDefined() || next.IsNull()) {
      next = YAML::Node(YAML::NodeType::Map);
    } else if (!next.IsMap()) {
      throw ConfigError("override '" + path + "': '" + parts[i] + "' is not a mapping", "--set");
    }
    chain.push_back(next);
  }
  chain.back()[parts.back()] = value;
}

Section::Section(YAML::Node node, std::string source, std::string path)
    // A missing key yields an invalid handle that cannot be assigned to, so
    // absent and null sections start from a fresh map.
    : node_(node && !node.IsNull() ? node : YAML::Node(YAML::NodeType::Map)),
      source_(std::move(source)),
      path_(std::move(path)) {
  if (!node_.IsMap()) fail(path_.empty() ? "expected a mapping" : "'" + path_ + "' must be a mapping", node_);
}

bool Section::has(const std::string& key) const {
  YAML::Node v = at(key);
  return v && !v.IsNull();
}

std::optional<Section> Section::child(const std::string& key) {
  used_.insert(key);
  if (!has(key)) return std::nullopt;
  return Section(at(key), source_, qualified(key));
}

std::vector<Section> Section::children(const std::string& key) {
  used_.insert(key);
  std::vector<Section> out;
  if (!has(key)) return out;
  YAML::Node v = at(key);
  if (!v.IsSequence()) fail("key '" + qualified(key) + "' must be a list", v);
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.emplace_back(v[i], source_, qualified(key) + "[" + std::to_string(i) + "]");
  }
  return out;
}

YAML::Node Section::raw(const std::string& key) {
  used_.insert(key);
  return at(key);
}

void Section::finish() const {
  for (const auto& kv : node_) {
    const auto key = kv.first.as<std::string>();
    if (!used_.count(key)) fail("unknown key '" + qualified(key) + "'", kv.first);
  }
}

void Section::fail(const std::string& what, const YAML::Node& at) const {
  throw ConfigError(what, source_, line_of(at));
}

void Section::fail_key(const std::string& key, const std::string& what) const {
  YAML::Node v = at(key);
  throw ConfigError("'" + qualified(key) + "' " + what, source_, line_of(v ? v : node_));
}

}  // namespace sttsim::config
