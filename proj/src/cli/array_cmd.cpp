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

#include <fmt/format.h>

#include <optional>

#include "common.hpp"

namespace sttsim::cli {

namespace {

std::string metrics_row(const arraymodel::ArrayMetrics& m) {
  return fmt::format("{},{},{},{},{},{},{},{}", num(m.capacity_kb), num(m.area_mm2), num(m.read_latency_ns),
                     num(m.write_latency_ns), num(m.read_energy_pj), num(m.write_energy_pj), num(m.leakage_mw),
                     num(m.wer));
}

}  // namespace

CommandOutput cmd_array_sweep(config::Section& root, Context& ctx) {
  using arraymodel::AnchorFamily;
  CommandOutput res;
  json& cfg = res.resolved;
  const auto mode = root.get<std::string>("mode", "iso-capacity");
  if (mode != "iso-capacity" && mode != "iso-area") root.fail_key("mode", "must be iso-capacity or iso-area");
  cfg["mode"] = mode;
  const auto table = parse_calibration(root, ctx, cfg);

  std::vector<arraymodel::MemoryTechnology> techs;
  if (root.has("technologies")) {
    const YAML::Node list = root.raw("technologies");
    if (!list.IsSequence()) root.fail_key("technologies", "must be a list");
    for (const auto& n : list) techs.push_back(parse_technology(root, n, "technologies"));
    if (techs.empty()) root.fail_key("technologies", "must not be empty");
  } else {
    root.raw("technologies");
    techs = {arraymodel::MemoryTechnology::sram(), arraymodel::MemoryTechnology::mram_base()};
  }
  json tj = json::array();
  for (const auto& t : techs) tj.push_back(technology_json(t));
  cfg["technologies"] = tj;

  const bool iso_area = mode == "iso-area";
  const std::string key = iso_area ? "areas_mm2" : "capacities_kb";
  std::vector<double> defaults;
  for (const auto& m : table.anchors(AnchorFamily::Sram)) defaults.push_back(iso_area ? m.area_mm2 : m.capacity_kb);
  const auto values = parse_grid(root, key, defaults, cfg);
  root.raw(iso_area ? "capacities_kb" : "areas_mm2");
  root.finish();

  std::string csv = csv_preamble() + (iso_area ? "area_mm2" : "capacity_kb") +
                    ",technology,capacity_kb,area_mm2,read_latency_ns,write_latency_ns,read_energy_pj,"
                    "write_energy_pj,leakage_mw,wer,status\n";
  std::string ratios = csv_preamble() + (iso_area ? "area_mm2" : "capacity_kb") +
                       ",technology_a,technology_b,capacity_ratio,area_ratio,leakage_ratio,read_latency_ratio,"
                       "write_latency_ratio,read_energy_ratio,write_energy_ratio,status\n";
  std::size_t ok = 0, total = 0;
  for (double v : values) {
    std::vector<std::optional<arraymodel::ArrayMetrics>> row(techs.size());
    for (std::size_t t = 0; t < techs.size(); ++t) {
      ++total;
      const auto label = technology_label(techs[t]);
      try {
        const double cap = iso_area ? arraymodel::capacity_at_area(table, techs[t], v) : v;
        row[t] = arraymodel::metrics_at_capacity(table, techs[t], cap);
        csv += fmt::format("{},{},{},ok\n", num(v), label, metrics_row(*row[t]));
        ++ok;
      } catch (const OutOfRange&) {
        csv += fmt::format("{},{},,,,,,,,,out_of_range\n", num(v), label);
      }
    }
    for (std::size_t t = 1; t < techs.size(); ++t) {
      const auto la = technology_label(techs[0]), lb = technology_label(techs[t]);
      if (!row[0] || !row[t]) {
        ratios += fmt::format("{},{},{},,,,,,,,error\n", num(v), la, lb);
        continue;
      }
      const auto &a = *row[0], &b = *row[t];
      ratios += fmt::format("{},{},{},{},{},{},{},{},{},{},ok\n", num(v), la, lb, num(b.capacity_kb / a.capacity_kb),
                            num(b.area_mm2 / a.area_mm2), num(b.leakage_mw / a.leakage_mw),
                            num(b.read_latency_ns / a.read_latency_ns), num(b.write_latency_ns / a.write_latency_ns),
                            num(b.read_energy_pj / a.read_energy_pj), num(b.write_energy_pj / a.write_energy_pj));
    }
  }
  res.files.push_back({"array_sweep.csv", csv});
  if (techs.size() > 1) res.files.push_back({"array_ratios.csv", ratios});
  res.failed = ok == 0;
  res.summary = fmt::format("{} of {} points in range", ok, total);
  return res;
}

}  // namespace sttsim::cli
