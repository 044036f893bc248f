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

// Shared plumbing for the subcommands. Not installed.

#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "sttsim/arraymodel.hpp"
#include "sttsim/config.hpp"
#include "sttsim/dataflow.hpp"
#include "sttsim/energy.hpp"
#include "sttsim/magnetics.hpp"

namespace sttsim::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kManifestName = "manifest.json";

struct Context {
  std::string base_dir;  // relative paths in the config resolve against this
  unsigned workers = 1;
  json inputs = json::object();  // external files the run read, with content hashes
};

struct DataFile {
  std::string name;
  std::string content;
};

struct CommandOutput {
  json resolved = json::object();
  std::vector<DataFile> files;
  bool failed = false;  // every sweep point failed
  std::string summary;
};

using Command = CommandOutput (*)(config::Section& root, Context& ctx);

CommandOutput cmd_wer_sweep(config::Section& root, Context& ctx);
CommandOutput cmd_array_sweep(config::Section& root, Context& ctx);
CommandOutput cmd_system_compare(config::Section& root, Context& ctx);
CommandOutput cmd_hetero_write(config::Section& root, Context& ctx);
CommandOutput cmd_error_train(config::Section& root, Context& ctx);

/// First line of every CSV data file.
std::string csv_preamble();
/// Shortest decimal form that parses back to the same double.
std::string num(double v);

std::string read_file(const std::string& path);
std::string fnv1a64_hex(const std::string& bytes);
std::string resolve_path(const Context& ctx, const std::string& path);
/// Reads an external file and records its path and hash in ctx.inputs.
std::string read_input(Context& ctx, const std::string& role, const std::string& path);

/// A list of numbers, or a generator mapping {from, to, step} or
/// {from, to, count, scale: linear|log}.
std::vector<double> parse_grid(config::Section& s, const std::string& key, const std::vector<double>& fallback,
                               json& out);

magnetics::MtjDevice parse_device(config::Section& root, json& out);
magnetics::MagSimConfig parse_simulation(config::Section& root, std::uint64_t seed, unsigned workers, json& out);

arraymodel::MemoryTechnology parse_technology(config::Section& parent, const YAML::Node& node,
                                              const std::string& key);
json technology_json(const arraymodel::MemoryTechnology& t);
std::string technology_label(const arraymodel::MemoryTechnology& t);

arraymodel::CalibrationTable parse_calibration(config::Section& root, Context& ctx, json& out);
dataflow::Workload parse_workload(config::Section& root, Context& ctx, json& out);
dataflow::AcceleratorConfig parse_accelerator(config::Section& root, json& out);
energy::SystemEnergyConfig parse_system(config::Section& root, Context& ctx, json& out);

json report_json(const energy::EnergyReport& r);

}  // namespace sttsim::cli
