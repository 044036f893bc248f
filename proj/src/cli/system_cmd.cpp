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
#include <sstream>

#include "common.hpp"
#include "sttsim/parallel.hpp"

namespace sttsim::cli {

namespace {

using arraymodel::MemoryTechnology;

std::vector<std::pair<MemoryTechnology, MemoryTechnology>> parse_pairs(config::Section& root, json& out) {
  std::vector<std::pair<MemoryTechnology, MemoryTechnology>> pairs;
  if (!root.has("pairs")) {
    root.raw("pairs");
    pairs.emplace_back(MemoryTechnology::sram(), MemoryTechnology::mram_base());
  } else {
    const YAML::Node list = root.raw("pairs");
    if (!list.IsSequence()) root.fail_key("pairs", "must be a list of [a, b] pairs");
    for (const auto& p : list) {
      if (!p.IsSequence() || p.size() != 2) root.fail("each pair must list exactly two technologies", p);
      pairs.emplace_back(parse_technology(root, p[0], "pairs"), parse_technology(root, p[1], "pairs"));
    }
    if (pairs.empty()) root.fail_key("pairs", "must not be empty");
  }
  json pj = json::array();
  for (const auto& [a, b] : pairs) pj.push_back(json::array({technology_json(a), technology_json(b)}));
  out["pairs"] = pj;
  return pairs;
}

json side_json(const energy::SidePoint& s) {
  return {{"buffer_kb", s.buffer_kb},
          {"area_mm2", s.metrics.area_mm2},
          {"leakage_mw", s.metrics.leakage_mw},
          {"report", report_json(s.report)}};
}

std::string trace_csv(const dataflow::AccessTrace& trace, const dataflow::Workload& w) {
  std::ostringstream os;
  os << csv_preamble();
  dataflow::write_trace_csv(os, trace, w);
  return os.str();
}

}  // namespace

CommandOutput cmd_system_compare(config::Section& root, Context& ctx) {
  CommandOutput res;
  json& cfg = res.resolved;
  const auto mode = root.get<std::string>("mode", "iso-capacity");
  if (mode != "iso-capacity" && mode != "iso-area") root.fail_key("mode", "must be iso-capacity or iso-area");
  cfg["mode"] = mode;
  const auto workload = parse_workload(root, ctx, cfg);
  const auto accel = parse_accelerator(root, cfg);
  const auto sys = parse_system(root, ctx, cfg);
  const auto table = parse_calibration(root, ctx, cfg);
  const auto pairs = parse_pairs(root, cfg);
  const bool iso_area = mode == "iso-area";
  const std::string key = iso_area ? "buffer_area_mm2" : "buffer_kb";
  std::vector<double> defaults;
  for (const auto& m : table.anchors(arraymodel::AnchorFamily::Sram)) {
    defaults.push_back(iso_area ? m.area_mm2 : m.capacity_kb);
  }
  const auto values = parse_grid(root, key, defaults, cfg);
  root.raw(iso_area ? "buffer_kb" : "buffer_area_mm2");
  const bool traces = root.get("traces", false);
  cfg["traces"] = traces;
  root.finish();

  struct Job {
    std::size_t pair;
    double value;
    std::optional<energy::Comparison> result;
    std::string error;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (double v : values) jobs.push_back({p, v, std::nullopt, {}});
  }
  parallel_for(jobs.size(), ctx.workers, [&](std::size_t i) {
    auto& j = jobs[i];
    const auto& [a, b] = pairs[j.pair];
    try {
      j.result = iso_area ? energy::compare_iso_area(workload, accel, table, j.value, a, b, sys)
                          : energy::compare_iso_capacity(workload, accel, table, j.value, a, b, sys);
    } catch (const OutOfRange& e) {
      j.error = e.what();
    }
  });

  std::string csv = csv_preamble() + key +
                    ",technology_a,technology_b,buffer_kb_a,buffer_kb_b,total_nj_a,total_nj_b,dram_nj_a,dram_nj_b,"
                    "onchip_access_nj_a,onchip_access_nj_b,leakage_nj_a,leakage_nj_b,compute_nj_a,compute_nj_b,"
                    "time_ns_a,time_ns_b,improvement,status\n";
  json points = json::array();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& j = jobs[i];
    const auto la = technology_label(pairs[j.pair].first), lb = technology_label(pairs[j.pair].second);
    json pj = {{key, j.value}, {"technology_a", la}, {"technology_b", lb}};
    if (!j.result) {
      csv += fmt::format("{},{},{},,,,,,,,,,,,,,,,out_of_range\n", num(j.value), la, lb);
      pj["status"] = "out_of_range";
      pj["error"] = j.error;
      points.push_back(pj);
      continue;
    }
    ++ok;
    const auto& c = *j.result;
    const auto &ra = c.a.report, &rb = c.b.report;
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},ok\n", num(j.value), la, lb,
                       num(c.a.buffer_kb), num(c.b.buffer_kb), num(ra.total_nj), num(rb.total_nj), num(ra.dram_nj),
                       num(rb.dram_nj), num(ra.onchip_access_nj), num(rb.onchip_access_nj), num(ra.leakage_nj),
                       num(rb.leakage_nj), num(ra.compute_nj), num(rb.compute_nj), num(ra.time_ns), num(rb.time_ns),
                       num(c.improvement));
    pj["status"] = "ok";
    pj["improvement"] = c.improvement;
    pj["a"] = side_json(c.a);
    pj["b"] = side_json(c.b);
    points.push_back(pj);
    if (traces) {
      const auto prefix = fmt::format("traces/point{:03}", i);
      res.files.push_back({prefix + "_a.csv", trace_csv(c.a.trace, workload)});
      if (iso_area) res.files.push_back({prefix + "_b.csv", trace_csv(c.b.trace, workload)});
    }
  }
  res.files.insert(res.files.begin(), {"system_compare.csv", csv});
  json doc = {{"manifest", kManifestName}, {"mode", mode}, {"points", points}};
  res.files.insert(res.files.begin() + 1, {"system_breakdown.json", doc.dump(2) + "\n"});
  res.failed = ok == 0;
  res.summary = fmt::format("{} of {} points in range", ok, jobs.size());
  return res;
}

CommandOutput cmd_hetero_write(config::Section& root, Context& ctx) {
  CommandOutput res;
  json& cfg = res.resolved;
  const auto workload = parse_workload(root, ctx, cfg);
  const auto accel = parse_accelerator(root, cfg);
  const auto sys = parse_system(root, ctx, cfg);
  const auto table = parse_calibration(root, ctx, cfg);
  const double buffer_kb = root.get("buffer_kb", 1024.0);
  if (!(buffer_kb > 0)) root.fail_key("buffer_kb", "must be positive");
  cfg["buffer_kb"] = buffer_kb;

  std::optional<magnetics::LnWerFit> fit;
  std::optional<magnetics::WritePulse> baseline;
  if (auto f = root.child("device_fit")) {
    magnetics::LnWerFit v;
    v.duration_ns = f->require<double>("duration_ns");
    v.slope = f->require<double>("slope_per_ua");
    v.intercept = f->require<double>("intercept");
    f->finish();
    fit = v;
    cfg["device_fit"] = {{"duration_ns", v.duration_ns}, {"slope_per_ua", v.slope}, {"intercept", v.intercept}};
  }
  if (auto b = root.child("baseline_pulse")) {
    magnetics::WritePulse p{b->require<double>("amplitude_ua"), b->require<double>("duration_ns")};
    b->finish();
    baseline = p;
    cfg["baseline_pulse"] = {{"amplitude_ua", p.amplitude_ua}, {"duration_ns", p.duration_ns}};
  }

  struct Mode {
    std::string name;
    MemoryTechnology tech;
  };
  std::vector<Mode> modes;
  json modes_json = json::array();
  if (!root.has("modes")) {
    root.raw("modes");
    modes.push_back({"low_cost", MemoryTechnology::mram_low_voltage()});
  } else {
    for (auto& m : root.children("modes")) {
      Mode mode{m.require<std::string>("name"), {}};
      if (m.has("target_wer")) {
        if (!fit || !baseline) m.fail_key("target_wer", "needs top-level device_fit and baseline_pulse");
        const double target = m.require<double>("target_wer");
        try {
          const double amp = magnetics::required_amplitude(*fit, target);
          mode.tech = arraymodel::derive_custom_mode(*fit, *baseline, {amp, fit->duration_ns});
        } catch (const Error& e) {
          m.fail(e.what(), m.node());
        }
      } else {
        m.raw("target_wer");
        mode.tech = MemoryTechnology{arraymodel::TechnologyKind::MramCustom, 1.0, 1.0, 0.0};
        mode.tech.write_latency_factor = m.require<double>("write_latency_factor");
        mode.tech.write_energy_factor = m.require<double>("write_energy_factor");
        mode.tech.wer = m.require<double>("wer");
        try {
          mode.tech.validate();
        } catch (const ConfigError& e) {
          m.fail(e.what(), m.node());
        }
      }
      m.finish();
      modes.push_back(mode);
    }
    if (modes.empty()) root.fail_key("modes", "must not be empty");
  }
  for (const auto& m : modes) {
    modes_json.push_back({{"name", m.name},
                          {"write_latency_factor", m.tech.write_latency_factor},
                          {"write_energy_factor", m.tech.write_energy_factor},
                          {"wer", m.tech.wer}});
  }
  cfg["modes"] = modes_json;

  std::vector<int> bits;
  if (root.has("mantissa_bits")) {
    for (double b : parse_grid(root, "mantissa_bits", {}, cfg)) {
      if (b != static_cast<int>(b) || b < 0 || b > 23) root.fail_key("mantissa_bits", "entries must be integers in [0, 23]");
      bits.push_back(static_cast<int>(b));
    }
  } else {
    root.raw("mantissa_bits");
    bits = {0, 4, 8, 12, 16, 20, 23};
  }
  cfg["mantissa_bits"] = bits;
  root.finish();

  const auto sram = arraymodel::metrics_at_capacity(table, MemoryTechnology::sram(), buffer_kb);
  const auto mram = arraymodel::metrics_at_capacity(table, MemoryTechnology::mram_base(), buffer_kb);
  auto sized = accel;
  sized.activation_buffer_kb = sized.weight_buffer_kb = sized.error_buffer_kb = buffer_kb;
  sized.clock_ghz = sys.clock_ghz;
  const auto trace = dataflow::simulate_iteration(workload, sized);
  const energy::BufferMetrics base{mram, mram, mram};
  const auto base_report = energy::estimate_energy(trace, base, sys);
  const double base_bit_pj = mram.write_energy_pj / 32.0;
  energy::SegmentMap all_base;
  const double base_write_nj = energy::system_write_energy_nj(trace, base, all_base, sys.onchip_access_elements);
  const double sram_word_pj = sram.write_energy_pj;

  std::string csv = csv_preamble() +
                    "mode,write_energy_factor,write_latency_factor,wer,mantissa_bits,per_word_pj,word_factor,"
                    "improvement,latency_factor,sram_normalized_word_energy,system_write_nj,"
                    "system_write_improvement,system_total_improvement\n";
  double best = 0.0;
  for (const auto& m : modes) {
    for (int b : bits) {
      energy::SegmentMap map;
      map.mantissa = m.tech;
      map.mantissa_bits_on_optimized = b;
      const auto h = energy::hetero_write_energy(map, base_bit_pj);
      const double write_nj = energy::system_write_energy_nj(trace, base, map, sys.onchip_access_elements);
      const double sys_write_impr = base_write_nj / write_nj;
      const double total_impr = base_report.total_nj / (base_report.total_nj - base_write_nj + write_nj);
      best = std::max(best, sys_write_impr);
      csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", m.name, num(m.tech.write_energy_factor),
                         num(m.tech.write_latency_factor), num(m.tech.wer), b, num(h.per_word_pj), num(h.word_factor),
                         num(h.improvement), num(h.latency_factor), num(h.per_word_pj / sram_word_pj), num(write_nj),
                         num(sys_write_impr), num(total_impr));
    }
  }
  res.files.push_back({"hetero_write.csv", csv});
  json doc = {{"manifest", kManifestName},
              {"buffer_kb", buffer_kb},
              {"base_bit_energy_pj", base_bit_pj},
              {"sram_word_energy_pj", sram_word_pj},
              {"baseline_write_nj", base_write_nj},
              {"baseline_report", report_json(base_report)},
              {"best_system_write_improvement", best}};
  res.files.push_back({"hetero_write.json", doc.dump(2) + "\n"});
  res.summary = fmt::format("{} modes x {} mappings, best write improvement {:.3f}", modes.size(), bits.size(), best);
  return res;
}

}  // namespace sttsim::cli
