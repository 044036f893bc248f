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

#include "sttsim/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <thread>

#include "common.hpp"

namespace sttsim::cli {

namespace {

namespace fs = std::filesystem;

struct CommandInfo {
  const char* name;
  const char* help;
  Command run;
};

constexpr CommandInfo kCommands[] = {
    {"wer-sweep", "Monte Carlo switching probability over pulse grids, ln(WER) fits and the WER ladder",
     cmd_wer_sweep},
    {"array-sweep", "Array metrics per technology at iso-capacity or iso-area", cmd_array_sweep},
    {"system-compare", "Training-iteration energy of technology pairs over a buffer sweep", cmd_system_compare},
    {"hetero-write", "Per-word and system write energy of segment-mapped words", cmd_hetero_write},
    {"error-train", "Training with write errors injected per bit segment", cmd_error_train},
};

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spintronic memory design-space simulator", std::string(kToolName)};
  app.set_version_flag("--version", std::string(kToolVersion));
  std::string config_path, manifest_path, out_dir = "stt_sim_out";
  std::optional<std::uint64_t> seed;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "YAML config file");
  app.add_option("--seed", seed, "Root seed; overrides the config");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--workers", workers, "Worker threads for sweep points")->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "Override a config value, key.path=value (repeatable)");
  app.add_option("--manifest", manifest_path, "Repeat the run recorded in a manifest");
  app.fallthrough();
  app.require_subcommand(0, 1);
  for (const auto& c : kCommands) app.add_subcommand(c.name, c.help);
  app.get_option("--manifest")->excludes(app.get_option("--config"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    std::string command;
    if (!app.get_subcommands().empty()) command = app.get_subcommands().front()->get_name();
    json manifest_in;
    YAML::Node doc;
    Context ctx;
    ctx.workers = workers;
    std::string source = "<defaults>";
    if (!manifest_path.empty()) {
      try {
        manifest_in = json::parse(read_file(manifest_path));
      } catch (const json::exception& e) {
        throw ConfigError(std::string("not a manifest: ") + e.what(), manifest_path);
      }
      if (!manifest_in.contains("command") || !manifest_in.contains("config")) {
        throw ConfigError("manifest needs 'command' and 'config'", manifest_path);
      }
      const auto recorded = manifest_in["command"].get<std::string>();
      if (!command.empty() && command != recorded) {
        throw ConfigError(fmt::format("manifest records '{}', not '{}'", recorded, command), manifest_path);
      }
      command = recorded;
      source = manifest_path;
      doc = config::parse_yaml(manifest_in["config"].dump(), source);
      ctx.base_dir = fs::path(manifest_path).parent_path().string();
    } else if (!config_path.empty()) {
      source = config_path;
      doc = config::load_yaml_file(config_path);
      ctx.base_dir = fs::path(config_path).parent_path().string();
    } else {
      doc = YAML::Node(YAML::NodeType::Map);
    }
    if (command.empty()) throw ConfigError("no subcommand given (see --help)");
    const auto* info = std::find_if(std::begin(kCommands), std::end(kCommands),
                                    [&](const CommandInfo& c) { return command == c.name; });
    if (info == std::end(kCommands)) throw ConfigError("unknown command '" + command + "'", source);

    for (const auto& o : overrides) config::apply_override(doc, o);
    if (seed) {
      doc["seed"] = *seed;
      if (command == std::string("error-train") && doc["seeds"]) doc.remove("seeds");
    }

    config::Section root(doc, source);
    const auto root_seed = root.get<std::uint64_t>("seed", 1);
    CommandOutput res = info->run(root, ctx);
    if (!res.resolved.contains("seed")) res.resolved["seed"] = root_seed;

    if (manifest_in.contains("inputs")) {
      for (const auto& [role, entry] : ctx.inputs.items()) {
        const auto& old = manifest_in["inputs"];
        if (old.contains(role) && old[role].value("fnv1a64", "") != entry["fnv1a64"]) {
          err << fmt::format("{}: warning: {} {} changed since the manifest was written\n", kToolName, role,
                             entry["path"].get<std::string>());
        }
      }
      // Inlined inputs are not read again; keep their original provenance.
      for (const auto& [role, entry] : manifest_in["inputs"].items()) {
        if (!ctx.inputs.contains(role)) ctx.inputs[role] = entry;
      }
    }

    const fs::path dir(out_dir);
    json outputs = json::array();
    for (const auto& f : res.files) {
      write_text(dir / f.name, f.content);
      outputs.push_back(f.name);
    }
    json manifest = {{"tool", std::string(kToolName)},
                     {"version", std::string(kToolVersion)},
                     {"command", command},
                     {"seed", res.resolved["seed"]},
                     {"workers", workers},
                     {"config", res.resolved},
                     {"inputs", ctx.inputs},
                     {"outputs", outputs},
                     {"created_utc", utc_now()}};
    write_text(dir / kManifestName, manifest.dump(2) + "\n");
    out << fmt::format("{}: {}; wrote {} files to {}\n", command, res.summary, res.files.size() + 1, dir.string());
    if (res.failed) {
      err << fmt::format("{}: error: every sweep point failed\n", kToolName);
      return kRuntimeFailure;
    }
    return kOk;
  } catch (const ConfigError& e) {
    err << fmt::format("{}: config error: {}\n", kToolName, e.what());
    return kConfigFailure;
  } catch (const std::exception& e) {
    err << fmt::format("{}: error: {}\n", kToolName, e.what());
    return kRuntimeFailure;
  }
}

}  // namespace sttsim::cli
