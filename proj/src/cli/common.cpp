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

#include "common.hpp"

#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sttsim/error.hpp"

namespace sttsim::cli {

namespace fs = std::filesystem;

std::string csv_preamble() { return std::string("# manifest: ") + kManifestName + "\n"; }

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string resolve_path(const Context& ctx, const std::string& path) {
  fs::path p(path);
  if (p.is_relative() && !ctx.base_dir.empty()) p = fs::path(ctx.base_dir) / p;
  return p.lexically_normal().string();
}

std::string read_input(Context& ctx, const std::string& role, const std::string& path) {
  const std::string resolved = resolve_path(ctx, path);
  std::string text = read_file(resolved);
  ctx.inputs[role] = {{"path", fs::absolute(resolved).lexically_normal().string()},
                      {"fnv1a64", fnv1a64_hex(text)}};
  return text;
}

std::vector<double> parse_grid(config::Section& s, const std::string& key, const std::vector<double>& fallback,
                               json& out) {
  std::vector<double> values;
  if (!s.has(key)) {
    s.raw(key);
    values = fallback;
  } else if (YAML::Node node = s.raw(key); node.IsMap()) {
    config::Section g(node, s.source(), key);
    const auto from = g.require<double>("from");
    const auto to = g.require<double>("to");
    if (g.has("step")) {
      const auto step = g.require<double>("step");
      if (!(step > 0)) g.fail_key("step", "must be positive");
      if (to < from) g.fail_key("to", "must not be below 'from'");
      const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
      for (std::size_t i = 0; i < n; ++i) values.push_back(from + static_cast<double>(i) * step);
    } else {
      const auto count = g.require<std::size_t>("count");
      const auto scale = g.get<std::string>("scale", "linear");
      if (count < 1) g.fail_key("count", "must be at least 1");
      if (scale != "linear" && scale != "log") g.fail_key("scale", "must be 'linear' or 'log'");
      if (scale == "log" && !(from > 0 && to > 0)) g.fail_key("from", "and 'to' must be positive on a log scale");
      for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        values.push_back(scale == "log" ? std::exp(std::log(from) + t * (std::log(to) - std::log(from)))
                                        : from + t * (to - from));
      }
    }
    g.finish();
  } else {
    values = std::vector<double>{};
    if (node.IsScalar()) {
      values.push_back(s.require<double>(key));
    } else {
      values = s.get_list<double>(key, {});
    }
  }
  if (values.empty()) s.fail_key(key, "must not be empty");
  out[key] = values;
  return values;
}

magnetics::MtjDevice parse_device(config::Section& root, json& out) {
  magnetics::MtjDevice d;
  auto sec = root.child("device");
  config::Section s = sec ? *sec : config::Section(YAML::Node(), root.source(), "device");
  d.fl_thickness_nm = s.get("fl_thickness_nm", d.fl_thickness_nm);
  d.lateral_x_nm = s.get("lateral_x_nm", d.lateral_x_nm);
  d.lateral_y_nm = s.get("lateral_y_nm", d.lateral_y_nm);
  d.saturation_magnetization_emu_cc = s.get("saturation_magnetization_emu_cc", d.saturation_magnetization_emu_cc);
  d.damping = s.get("damping", d.damping);
  d.temperature_k = s.get("temperature_k", d.temperature_k);
  d.reference_temperature_k = s.get("reference_temperature_k", d.reference_temperature_k);
  d.thermal_stability = s.get("thermal_stability", d.thermal_stability);
  d.stt_efficiency_kbt_per_ua = s.get("stt_efficiency_kbt_per_ua", d.stt_efficiency_kbt_per_ua);
  d.gyromagnetic_ratio = s.get("gyromagnetic_ratio", d.gyromagnetic_ratio);
  s.finish();
  try {
    d.validate();
  } catch (const InvalidParameter& e) {
    s.fail(e.what(), s.node());
  }
  out["device"] = {{"fl_thickness_nm", d.fl_thickness_nm},
                   {"lateral_x_nm", d.lateral_x_nm},
                   {"lateral_y_nm", d.lateral_y_nm},
                   {"saturation_magnetization_emu_cc", d.saturation_magnetization_emu_cc},
                   {"damping", d.damping},
                   {"temperature_k", d.temperature_k},
                   {"reference_temperature_k", d.reference_temperature_k},
                   {"thermal_stability", d.thermal_stability},
                   {"stt_efficiency_kbt_per_ua", d.stt_efficiency_kbt_per_ua},
                   {"gyromagnetic_ratio", d.gyromagnetic_ratio}};
  return d;
}

magnetics::MagSimConfig parse_simulation(config::Section& root, std::uint64_t seed, unsigned workers, json& out) {
  magnetics::MagSimConfig c;
  auto sec = root.child("simulation");
  config::Section s = sec ? *sec : config::Section(YAML::Node(), root.source(), "simulation");
  c.time_step_ps = s.get("time_step_ps", c.time_step_ps);
  c.relax_time_ns = s.get("relax_time_ns", c.relax_time_ns);
  c.trials = s.get<std::uint64_t>("trials", c.trials);
  if (s.has("initial_tilt_rad")) c.initial_tilt_rad = s.require<double>("initial_tilt_rad");
  s.raw("initial_tilt_rad");
  s.finish();
  c.seed = seed;
  c.workers = workers;
  try {
    c.validate();
  } catch (const InvalidParameter& e) {
    s.fail(e.what(), s.node());
  }
  out["simulation"] = {{"time_step_ps", c.time_step_ps}, {"relax_time_ns", c.relax_time_ns}, {"trials", c.trials}};
  if (c.initial_tilt_rad) out["simulation"]["initial_tilt_rad"] = *c.initial_tilt_rad;
  return c;
}

arraymodel::MemoryTechnology parse_technology(config::Section& parent, const YAML::Node& node,
                                              const std::string& key) {
  using arraymodel::MemoryTechnology;
  try {
    if (node.IsScalar()) {
      return MemoryTechnology::named(arraymodel::technology_kind_from_string(node.as<std::string>()));
    }
    if (!node.IsMap()) parent.fail("'" + key + "' entries must be a name or a mapping", node);
    config::Section s(node, parent.source(), key);
    const auto kind = arraymodel::technology_kind_from_string(s.require<std::string>("kind"));
    MemoryTechnology t = kind == arraymodel::TechnologyKind::MramCustom ? MemoryTechnology{kind, 1.0, 1.0, 0.0}
                                                                           : MemoryTechnology::named(kind);
    t.kind = kind;
    t.write_latency_factor = s.get("write_latency_factor", t.write_latency_factor);
    t.write_energy_factor = s.get("write_energy_factor", t.write_energy_factor);
    t.wer = s.get("wer", t.wer);
    s.finish();
    t.validate();
    return t;
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw;
    parent.fail(e.what(), node);
  }
}

json technology_json(const arraymodel::MemoryTechnology& t) {
  return {{"kind", std::string(arraymodel::to_string(t.kind))},
          {"write_latency_factor", t.write_latency_factor},
          {"write_energy_factor", t.write_energy_factor},
          {"wer", t.wer}};
}

std::string technology_label(const arraymodel::MemoryTechnology& t) {
  const auto named = std::string(arraymodel::to_string(t.kind));
  if (t.kind != arraymodel::TechnologyKind::MramCustom) {
    try {
      if (arraymodel::MemoryTechnology::named(t.kind) == t) return named;
    } catch (const ConfigError&) {
    }
  }
  return fmt::format("{}[{}/{}/{}]", named, num(t.write_latency_factor), num(t.write_energy_factor), num(t.wer));
}

arraymodel::CalibrationTable parse_calibration(config::Section& root, Context& ctx, json& out) {
  using arraymodel::AnchorFamily;
  const YAML::Node node = root.raw("calibration");
  if (!node || node.IsNull() || (node.IsScalar() && node.as<std::string>() == "builtin")) {
    out["calibration"] = "builtin";
    return arraymodel::builtin_calibration();
  }
  arraymodel::CalibrationTable table;
  if (node.IsScalar()) {
    const auto path = node.as<std::string>();
    std::istringstream in(read_input(ctx, "calibration", path));
    table = arraymodel::parse_calibration(in, resolve_path(ctx, path));
  } else if (node.IsSequence()) {
    std::map<AnchorFamily, std::vector<arraymodel::ArrayMetrics>> anchors;
    for (std::size_t i = 0; i < node.size(); ++i) {
      config::Section r(node[i], root.source(), fmt::format("calibration[{}]", i));
      const auto tech = r.require<std::string>("technology");
      if (tech != "SRAM" && tech != "MRAM") r.fail_key("technology", "must be SRAM or MRAM");
      arraymodel::ArrayMetrics m;
      m.capacity_kb = r.require<double>("capacity_kb");
      m.area_mm2 = r.require<double>("area_mm2");
      m.read_latency_ns = r.require<double>("read_latency_ns");
      m.write_latency_ns = r.require<double>("write_latency_ns");
      m.read_energy_pj = r.require<double>("read_energy_pj");
      m.write_energy_pj = r.require<double>("write_energy_pj");
      m.leakage_mw = r.require<double>("leakage_mw");
      r.finish();
      anchors[tech == "SRAM" ? AnchorFamily::Sram : AnchorFamily::Mram].push_back(m);
    }
    try {
      table = arraymodel::CalibrationTable(std::move(anchors));
    } catch (const ConfigError& e) {
      root.fail(e.what(), node);
    }
  } else {
    root.fail_key("calibration", "must be 'builtin', a CSV path or a list of anchor rows");
  }
  json rows = json::array();
  for (auto family : {AnchorFamily::Sram, AnchorFamily::Mram}) {
    for (const auto& m : table.anchors(family)) {
      rows.push_back({{"technology", family == AnchorFamily::Sram ? "SRAM" : "MRAM"},
                      {"capacity_kb", m.capacity_kb},
                      {"area_mm2", m.area_mm2},
                      {"read_latency_ns", m.read_latency_ns},
                      {"write_latency_ns", m.write_latency_ns},
                      {"read_energy_pj", m.read_energy_pj},
                      {"write_energy_pj", m.write_energy_pj},
                      {"leakage_mw", m.leakage_mw}});
    }
  }
  out["calibration"] = rows;
  return table;
}

dataflow::Workload parse_workload(config::Section& root, Context& ctx, json& out) {
  const YAML::Node node = root.raw("workload");
  dataflow::Workload w;
  if (!node || node.IsNull()) root.fail("missing required key 'workload'", root.node());
  if (node.IsScalar()) {
    const auto path = node.as<std::string>();
    w = dataflow::parse_workload(read_input(ctx, "workload", path), resolve_path(ctx, path));
  } else {
    w = dataflow::parse_workload(node, root.source());
  }
  json layers = json::array();
  for (const auto& l : w) {
    json j;
    if (!l.name.empty()) j["name"] = l.name;
    if (const auto* c = std::get_if<dataflow::ConvLayer>(&l.shape)) {
      j["type"] = "conv";
      j["batch"] = c->batch;
      j["in_channels"] = c->in_channels;
      j["in_height"] = c->in_height;
      j["in_width"] = c->in_width;
      j["out_channels"] = c->out_channels;
      j["kernel"] = c->kernel;
      j["stride"] = c->stride;
      j["padding"] = c->padding;
    } else {
      const auto& f = std::get<dataflow::FcLayer>(l.shape);
      j["type"] = "fc";
      j["batch"] = f.batch;
      j["in_features"] = f.in_features;
      j["out_features"] = f.out_features;
    }
    layers.push_back(j);
  }
  out["workload"] = {{"layers", layers}};
  return w;
}

dataflow::AcceleratorConfig parse_accelerator(config::Section& root, json& out) {
  dataflow::AcceleratorConfig a;
  auto sec = root.child("accelerator");
  config::Section s = sec ? *sec : config::Section(YAML::Node(), root.source(), "accelerator");
  a.rows = s.get<std::uint64_t>("rows", a.rows);
  a.cols = s.get<std::uint64_t>("cols", a.cols);
  a.element_size = s.get<std::uint64_t>("element_size", a.element_size);
  s.finish();
  try {
    a.validate();
  } catch (const ConfigError& e) {
    s.fail(e.what(), s.node());
  }
  out["accelerator"] = {{"rows", a.rows}, {"cols", a.cols}, {"element_size", a.element_size}};
  return a;
}

energy::SystemEnergyConfig parse_system(config::Section& root, Context& ctx, json& out) {
  energy::SystemEnergyConfig sys;
  const YAML::Node given = root.raw("system");
  std::string source = root.source();
  YAML::Node node = given;
  if (given && given.IsScalar()) {
    source = resolve_path(ctx, given.as<std::string>());
    node = config::parse_yaml(read_input(ctx, "system", given.as<std::string>()), source);
  }
  config::Section s(node, source, node && node.IsMap() && source == root.source() ? "system" : "");
  sys.dram_energy_per_access_nj = s.get("dram_energy_per_access_nj", sys.dram_energy_per_access_nj);
  sys.dram_latency_ns = s.get("dram_latency_ns", sys.dram_latency_ns);
  sys.mac_energy_pj = s.get("mac_energy_pj", sys.mac_energy_pj);
  sys.clock_ghz = s.get("clock_ghz", sys.clock_ghz);
  sys.dram_burst_elements = s.get("dram_burst_elements", sys.dram_burst_elements);
  sys.onchip_access_elements = s.get("onchip_access_elements", sys.onchip_access_elements);
  s.finish();
  try {
    sys.validate();
  } catch (const ConfigError& e) {
    s.fail(e.what(), s.node());
  }
  out["system"] = {{"dram_energy_per_access_nj", sys.dram_energy_per_access_nj},
                   {"dram_latency_ns", sys.dram_latency_ns},
                   {"mac_energy_pj", sys.mac_energy_pj},
                   {"clock_ghz", sys.clock_ghz},
                   {"dram_burst_elements", sys.dram_burst_elements},
                   {"onchip_access_elements", sys.onchip_access_elements}};
  return sys;
}

json report_json(const energy::EnergyReport& r) {
  json phases = json::object();
  for (auto p : dataflow::kPhases) {
    const auto& e = r.per_phase[static_cast<std::size_t>(p)];
    phases[std::string(dataflow::to_string(p))] = {{"dram_nj", e.dram_nj},
                                                   {"onchip_read_nj", e.onchip_read_nj},
                                                   {"onchip_write_nj", e.onchip_write_nj},
                                                   {"leakage_nj", e.leakage_nj},
                                                   {"compute_nj", e.compute_nj},
                                                   {"total_nj", e.total_nj()},
                                                   {"time_ns", e.time_ns}};
  }
  return {{"dram_nj", r.dram_nj},
          {"onchip_access_nj", r.onchip_access_nj},
          {"onchip_write_nj", r.onchip_write_nj},
          {"leakage_nj", r.leakage_nj},
          {"compute_nj", r.compute_nj},
          {"total_nj", r.total_nj},
          {"time_ns", r.time_ns},
          {"dominant", std::string(r.dominant())},
          {"per_phase", phases}};
}

}  // namespace sttsim::cli
