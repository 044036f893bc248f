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

// Acceptance checks: one PASS/FAIL line per criterion. Heavy checks drive the
// stt_sim commands on the bundled configs; the rest call the library.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "sttsim/arraymodel.hpp"
#include "sttsim/cli.hpp"
#include "sttsim/dataflow.hpp"
#include "sttsim/energy.hpp"
#include "sttsim/errortrain.hpp"
#include "sttsim/magnetics.hpp"
#include "systolic_oracle.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sttsim;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

struct Env {
  fs::path source;
  fs::path work;
  unsigned workers = 1;
  std::optional<fs::path> wer_sweep;  // wer_ladder run shared by criteria 4 and 5
  std::optional<double> wer_sweep_seconds;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

// Runs stt_sim in-process; throws with its stderr on a non-zero exit.
void stt_sim(const Env& env, std::vector<std::string> args) {
  args.insert(args.begin(), {"stt_sim", "--workers", std::to_string(env.workers)});
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) throw std::runtime_error(fmt::format("stt_sim exited {}: {}", code, err.str()));
}

fs::path config(const Env& env, const std::string& name) { return env.source / "configs" / (name + ".yaml"); }

const fs::path& run_wer_sweep(Env& env) {
  if (!env.wer_sweep) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto dir = env.work / "wer_ladder";
    stt_sim(env, {"--config", config(env, "wer_ladder").string(), "--out", dir.string(), "wer-sweep"});
    env.wer_sweep = dir;
    env.wer_sweep_seconds = seconds_since(t0);
  }
  return *env.wer_sweep;
}

Outcome c1_wer_identity(Env&) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = make_stream(2024, {});
  std::size_t bad = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    const double p = uniform01(rng);
    const double w = magnetics::wer_from_psw(p);
    if (w != 1.0 - p || 1.0 - w != p) ++bad;
  }
  const double t = seconds_since(t0);
  o.require(bad == 0, fmt::format("{} of 10^6 round trips inexact", bad));
  o.require(t < 1.0, fmt::format("runtime {:.2f} s >= 1 s", t));
  o.note(fmt::format("10^6 probabilities, {} inexact, {:.2f} s", bad, t));
  return o;
}

Outcome c2_thermal_field(Env&) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  magnetics::MtjDevice d;
  const double sigma = magnetics::thermal_field_sigma(d, 1.0);
  auto rng = make_stream(7, {});
  std::array<double, 3> sum{}, sq{};
  constexpr int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const auto h = magnetics::sample_thermal_field(d, 1.0, rng);
    const double v[3] = {h.x, h.y, h.z};
    for (int k = 0; k < 3; ++k) sum[k] += v[k], sq[k] += v[k] * v[k];
  }
  double worst = 0;
  for (int k = 0; k < 3; ++k) {
    const double mean = sum[k] / n;
    const double sd = std::sqrt((sq[k] - n * mean * mean) / (n - 1));
    worst = std::max(worst, std::abs(sd / sigma - 1));
  }
  o.require(worst < 0.02, fmt::format("sample sd off by {:.4f}", worst));
  d.temperature_k = 0;
  bool zero = magnetics::thermal_field_sigma(d, 1.0) == 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto h = magnetics::sample_thermal_field(d, 1.0, rng);
    zero = zero && h.x == 0 && h.y == 0 && h.z == 0;
  }
  o.require(zero, "non-zero field at T = 0");
  const double t = seconds_since(t0);
  o.require(t < 5.0, fmt::format("runtime {:.2f} s >= 5 s", t));
  o.note(fmt::format("sigma {:.3f} Oe, worst component deviation {:.3f}%, T = 0 exact zero {}, {:.2f} s", sigma,
                     100 * worst, zero ? "yes" : "no", t));
  return o;
}

Outcome c3_deterministic_threshold(Env&) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  magnetics::MtjDevice d;
  d.temperature_k = 0;
  magnetics::MagSimConfig cfg;
  const double ic = d.critical_current_ua();
  const double pulse_ns = 1000;
  auto switches = [&](double amp) {
    auto rng = make_stream(1, {});
    return magnetics::integrate_llg(d, {amp, pulse_ns}, cfg, rng).switched;
  };
  double lo = 0.5 * ic, hi = 2.0 * ic;
  const bool bracket = !switches(lo) && switches(hi);
  o.require(bracket, "0.5 I_c0 / 2 I_c0 do not bracket the boundary");
  for (int i = 0; i < 48; ++i) {
    const double mid = 0.5 * (lo + hi);
    (switches(mid) ? hi : lo) = mid;
  }
  const double boundary = 0.5 * (lo + hi);
  const double rel = boundary / ic - 1;
  o.require(std::abs(rel) < 0.05, fmt::format("boundary {:.3f} uA is {:.2f}% from I_c0", boundary, 100 * rel));
  const double t = seconds_since(t0);
  o.require(t < 30.0, fmt::format("runtime {:.1f} s >= 30 s", t));
  o.note(fmt::format("boundary {:.3f} uA vs I_c0 {:.3f} uA ({:+.2f}%), 50 integrations of {} ns, {:.1f} s", boundary,
                     ic, 100 * rel, pulse_ns, t));
  return o;
}

Outcome c4_sigmoid_onset(Env& env) {
  Outcome o;
  const auto& dir = run_wer_sweep(env);
  std::map<double, std::vector<std::pair<double, double>>> curves;  // duration -> (amp, p)
  std::uint64_t min_trials = ~0ull;
  for (const auto& r : csv_rows(dir / "wer_sweep.csv")) {
    curves[std::stod(r[1])].emplace_back(std::stod(r[0]), std::stod(r[3]));
    min_trials = std::min<std::uint64_t>(min_trials, std::stoull(r[2]));
  }
  o.require(min_trials >= 2000, fmt::format("only {} trials per point", min_trials));
  const auto ladder = json::parse(slurp(dir / "wer_ladder.json"));
  std::map<double, double> slope;
  for (const auto& f : ladder["fits"]) {
    if (f.contains("slope_per_ua")) slope[f["duration_ns"].get<double>()] = f["slope_per_ua"].get<double>();
  }
  std::vector<std::pair<double, double>> onsets;
  for (double dur : {5.0, 10.0, 20.0}) {
    const auto it = curves.find(dur);
    if (it == curves.end()) {
      o.require(false, fmt::format("no sweep at {} ns", dur));
      continue;
    }
    auto pts = it->second;
    std::sort(pts.begin(), pts.end());
    o.require(pts.size() >= 10, fmt::format("{} ns grid has {} points", dur, pts.size()));
    // Fitted monotonicity: ln WER falls with amplitude. Raw points must not
    // fall by more than 3 binomial sigma.
    o.require(slope.count(dur) && slope[dur] < 0, fmt::format("{} ns fit slope not negative", dur));
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double pa = pts[i - 1].second, pb = pts[i].second;
      const double tol = 3 * std::sqrt((pa * (1 - pa) + pb * (1 - pb)) / static_cast<double>(min_trials));
      o.require(pb >= pa - tol, fmt::format("{} ns: P_sw drops {} -> {} at {} uA", dur, pa, pb, pts[i].first));
    }
    double onset = NAN;
    for (const auto& [a, p] : pts) {
      if (p >= 0.5) {
        onset = a;
        break;
      }
    }
    o.require(!std::isnan(onset), fmt::format("{} ns never reaches P_sw 0.5", dur));
    onsets.emplace_back(dur, onset);
  }
  for (std::size_t i = 1; i < onsets.size(); ++i) {
    o.require(onsets[i].second < onsets[i - 1].second,
              fmt::format("onset at {} ns ({}) not below {} ns ({})", onsets[i].first, onsets[i].second,
                          onsets[i - 1].first, onsets[i - 1].second));
  }
  std::string s;
  for (const auto& [d, a] : onsets) s += fmt::format(" {} ns: {} uA;", d, a);
  o.note(fmt::format("onset (first P_sw >= 0.5):{} {} trials/point, sweep {:.0f} s", s, min_trials,
                     *env.wer_sweep_seconds));
  o.require(*env.wer_sweep_seconds < 600, "sweep runtime >= 10 min");
  return o;
}

Outcome c5_ln_wer_linearity(Env& env) {
  Outcome o;
  const auto ladder = json::parse(slurp(run_wer_sweep(env) / "wer_ladder.json"));
  std::string fits;
  for (double dur : {5.0, 10.0, 20.0}) {
    const json* fit = nullptr;
    for (const auto& f : ladder["fits"]) {
      if (f["duration_ns"].get<double>() == dur) fit = &f;
    }
    if (!fit || !fit->contains("r_squared")) {
      o.require(false, fmt::format("no fit at {} ns", dur));
      continue;
    }
    const double r2 = (*fit)["r_squared"].get<double>();
    o.require(r2 >= 0.9, fmt::format("R^2 {:.3f} < 0.9 at {} ns", r2, dur));
    fits += fmt::format(" {} ns R^2 {:.3f};", dur, r2);
    std::vector<std::pair<double, double>> rungs;  // (target, amplitude)
    for (const auto& row : ladder["ladder"]) {
      const double t = row["target_wer"].get<double>();
      if (row["duration_ns"].get<double>() != dur || t > 1e-5 || t < 1e-9 || !row.contains("amplitude_ua")) continue;
      rungs.emplace_back(t, row["amplitude_ua"].get<double>());
    }
    std::sort(rungs.begin(), rungs.end(), [](auto& a, auto& b) { return a.first > b.first; });
    o.require(rungs.size() >= 5, fmt::format("{} ns ladder has {} rungs in [1e-9, 1e-5]", dur, rungs.size()));
    for (std::size_t i = 1; i < rungs.size(); ++i) {
      o.require(rungs[i].second > rungs[i - 1].second,
                fmt::format("{} ns: amplitude not increasing from WER {} to {}", dur, rungs[i - 1].first,
                            rungs[i].first));
    }
  }
  o.note("fits:" + fits + " ladder amplitudes increase toward 1e-9");
  return o;
}

Outcome c6_array_anchors(Env&) {
  using arraymodel::MemoryTechnology;
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto& table = arraymodel::builtin_calibration();
  struct Cell {
    bool mram;
    double area, cap, rl, wl, re, we, leak;
  };
  const Cell cells[] = {{false, 0.5, 183, 0.2, 0.1, 0.1, 0.1, 594},
                        {true, 0.5, 512, 3.3, 10.2, 0.3, 1.5, 323},
                        {false, 48.1, 40592, 10.3, 5.3, 1.8, 1.4, 64257},
                        {true, 48.1, 131072, 14.6, 15.8, 1.6, 2.6, 14573}};
  int exact = 0;
  for (const auto& c : cells) {
    const auto tech = c.mram ? MemoryTechnology::mram_base() : MemoryTechnology::sram();
    const auto m = arraymodel::metrics_at_capacity(table, tech, c.cap);
    const bool ok = m.area_mm2 == c.area && m.read_latency_ns == c.rl && m.write_latency_ns == c.wl &&
                    m.read_energy_pj == c.re && m.write_energy_pj == c.we && m.leakage_mw == c.leak &&
                    arraymodel::capacity_at_area(table, tech, c.area) == c.cap;
    o.require(ok, fmt::format("{} at {} KB differs from the table", c.mram ? "MRAM" : "SRAM", c.cap));
    exact += ok;
  }
  std::string ratios;
  for (double area : {0.5, 48.1}) {
    const double cs = arraymodel::capacity_at_area(table, MemoryTechnology::sram(), area);
    const double cm = arraymodel::capacity_at_area(table, MemoryTechnology::mram_base(), area);
    const double ls = arraymodel::metrics_at_capacity(table, MemoryTechnology::sram(), cs).leakage_mw;
    const double lm = arraymodel::metrics_at_capacity(table, MemoryTechnology::mram_base(), cm).leakage_mw;
    const double cap_ratio = cm / cs, leak_ratio = ls / lm;
    o.require(cap_ratio >= 2.8 && cap_ratio <= 3.2,
              fmt::format("capacity ratio {:.4f} at {} mm^2 outside [2.8, 3.2]", cap_ratio, area));
    o.require(leak_ratio >= 1.9 && leak_ratio <= 4.4,
              fmt::format("leakage ratio {:.4f} at {} mm^2 outside [1.9, 4.4]", leak_ratio, area));
    ratios += fmt::format(" {} mm^2: capacity x{:.3f}, leakage /{:.3f};", area, cap_ratio, leak_ratio);
  }
  const double t = seconds_since(t0);
  o.require(t < 1.0, "runtime >= 1 s");
  o.note(fmt::format("{}/4 table cells exact;{} the calibration cells themselves give these ratios", exact, ratios));
  return o;
}

Outcome c7_write_modes(Env&) {
  using arraymodel::MemoryTechnology;
  Outcome o;
  const auto& table = arraymodel::builtin_calibration();
  int checked = 0;
  for (const auto& a : table.anchors(arraymodel::AnchorFamily::Mram)) {
    const auto base = arraymodel::metrics_at_capacity(table, MemoryTechnology::mram_base(), a.capacity_kb);
    for (const auto& tech : {MemoryTechnology::mram_low_voltage(), MemoryTechnology::mram_low_duration()}) {
      const auto m = arraymodel::metrics_at_capacity(table, tech, a.capacity_kb);
      const bool ok = m.write_latency_ns == base.write_latency_ns * 0.47 &&
                      m.write_energy_pj == base.write_energy_pj * 0.40 && m.wer == 8e-4 &&
                      m.read_latency_ns == base.read_latency_ns && m.read_energy_pj == base.read_energy_pj &&
                      m.leakage_mw == base.leakage_mw;
      o.require(ok, fmt::format("{} at {} KB", arraymodel::to_string(tech.kind), a.capacity_kb));
      ++checked;
    }
  }
  o.note(fmt::format("{} (mode, capacity) points: write latency x0.47, write energy x0.40, WER 8e-4", checked));
  return o;
}

Outcome c8_dataflow_oracle(Env&) {
  using dataflow::LayerSpec;
  using dataflow::Phase;
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    const char* label;
    LayerSpec layer;
    std::uint64_t rows, cols;
  };
  const Case cases[] = {
      {"Conv(1,1,4,4,1,3,1,0)", LayerSpec::conv(1, 1, 4, 4, 1, 3, 1, 0), 256, 256},
      {"FC(2,3,4)", LayerSpec::fc(2, 3, 4), 2, 2},
      {"strided Conv(1,2,7,5,4,3,2,0)", LayerSpec::conv(1, 2, 7, 5, 4, 3, 2, 0), 3, 3},
      {"padded Conv(2,3,6,6,5,3,1,1) multi-tile", LayerSpec::conv(2, 3, 6, 6, 5, 3, 1, 1), 4, 4},
      {"FC(3,10,7) multi-tile", LayerSpec::fc(3, 10, 7), 2, 2},
      {"Conv(1,2,5,5,3,1,1,0) pointwise", LayerSpec::conv(1, 2, 5, 5, 3, 1, 1, 0), 8, 2},
  };
  int compared = 0;
  for (const auto& c : cases) {
    dataflow::AcceleratorConfig cfg;
    cfg.rows = c.rows;
    cfg.cols = c.cols;
    const auto trace = dataflow::simulate_iteration({c.layer}, cfg);
    for (Phase p : {Phase::Forward, Phase::BackwardInputGrad, Phase::BackwardWeightGrad}) {
      const auto nest = oracle::loop_nest_shape(c.layer, p);
      const auto g = dataflow::gemm_view(c.layer, p);
      const auto pc = dataflow::count_phase_accesses(g, cfg);
      const auto ref = oracle::systolic_gemm(nest.rows, nest.depth, nest.cols, c.rows, c.cols);
      const bool ok = g.m_rows == nest.rows && g.k_depth == nest.depth && g.n_cols == nest.cols &&
                      pc.macs == nest.macs && ref.macs == nest.macs && pc.a_reads == ref.a_injections &&
                      pc.b_reads == ref.b_injections && pc.writes == ref.writes && pc.cycles == ref.cycles &&
                      pc.tiles == ref.tiles && ref.product_correct && trace.macs(p) == nest.macs &&
                      trace.compute_cycles(p) == ref.cycles;
      o.require(ok, fmt::format("{} {}", c.label, dataflow::to_string(p)));
      ++compared;
    }
  }
  const double t = seconds_since(t0);
  o.require(t < 10.0, "runtime >= 10 s");
  o.note(fmt::format("{} layers x 3 GEMM phases against the loop nests and a register-level array, {:.2f} s",
                     std::size(cases), t));
  return o;
}

Outcome c9_buffer_monotonicity(Env& env) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto w = dataflow::load_workload((env.source / "configs/workloads/toy4.yaml").string());
  o.require(w.size() == 4, "toy workload must have 4 layers");
  std::uint64_t prev = ~0ull;
  std::string sweep;
  for (double kb : {0.25, 1.0, 4.0, 16.0, 64.0, 256.0}) {
    const auto t = dataflow::simulate_iteration(w, dataflow::AcceleratorConfig::with_buffer_capacity(kb));
    o.require(t.dram_accesses() <= prev, fmt::format("DRAM accesses rise at {} KB", kb));
    prev = t.dram_accesses();
    sweep += fmt::format(" {}", prev);
  }
  std::uint64_t smallest = ~0ull;
  for (const auto& l : w) smallest = std::min({smallest, l.input_elements(), l.weight_elements(), l.output_elements()});
  const double below = 0.5 * static_cast<double>(smallest * 4) / 1024.0;
  const auto t = dataflow::simulate_iteration(w, dataflow::AcceleratorConfig::with_buffer_capacity(below));
  o.require(t.onchip_accesses() == 0, "on-chip accesses with buffers below every tensor");
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "runtime >= 10 s");
  o.note(fmt::format("DRAM accesses over 0.25..256 KB:{}; {} on-chip accesses at {:.3f} KB", sweep,
                     t.onchip_accesses(), below));
  return o;
}

Outcome c10_system_trend(Env& env) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = env.work / "system_iso_capacity";
  stt_sim(env, {"--config", config(env, "system_iso_capacity").string(), "--out", dir.string(),
                "system-compare"});
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : csv_rows(dir / "system_compare.csv")) {
    if (r[1] == "SRAM" && r[2] == "MRAM_BASE" && r[18] == "ok") pts.emplace_back(std::stod(r[0]), std::stod(r[17]));
  }
  std::sort(pts.begin(), pts.end());
  const auto& anchors = arraymodel::builtin_calibration().anchors(arraymodel::AnchorFamily::Sram);
  o.require(pts.size() == anchors.size(), fmt::format("{} sweep points for {} anchors", pts.size(), anchors.size()));
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    o.require(pts[i].second > 1, fmt::format("improvement {:.3f} at {} KB", pts[i].second, pts[i].first));
    if (i > 0) {
      o.require(pts[i].second >= pts[i - 1].second, fmt::format("improvement falls at {} KB", pts[i].first));
    }
    s += fmt::format(" {}:{:.2f}", pts[i].first, pts[i].second);
  }
  if (!pts.empty()) {
    const double top = pts.back().second;
    o.require(top >= 2 && top <= 30,
              fmt::format("improvement {:.2f} at the largest anchored capacity {} KB outside [2, 30]", top,
                          pts.back().first));
  }
  const auto doc = json::parse(slurp(dir / "system_breakdown.json"));
  const json* largest = nullptr;
  for (const auto& p : doc["points"]) {
    if (p["technology_a"] == "SRAM" && p["technology_b"] == "MRAM_BASE" && p.contains("a")) largest = &p;
  }
  if (largest) {
    for (const char* side : {"a", "b"}) {
      const auto& r = (*largest)[side]["report"];
      const double leak = r["leakage_nj"].get<double>();
      const bool dominant = leak > r["dram_nj"].get<double>() && leak > r["onchip_access_nj"].get<double>() &&
                            leak > r["compute_nj"].get<double>();
      o.require(dominant, fmt::format("leakage not the largest component on side {}", side));
    }
  } else {
    o.require(false, "no breakdown for the largest point");
  }
  const double t = seconds_since(t0);
  o.require(t < 60, "runtime >= 1 min");
  o.note(fmt::format("KB:improvement{}; {:.1f} s", s, t));
  return o;
}

Outcome c11_hetero_write(Env& env) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  energy::SegmentMap map;
  map.mantissa = {arraymodel::TechnologyKind::MramCustom, 1.0, 0.40, 1e-3};
  map.mantissa_bits_on_optimized = 23;
  const auto w = energy::hetero_write_energy(map, 1.0);
  o.require(std::abs(w.word_factor - 0.56875) <= 1e-15, fmt::format("word factor {:.17g}", w.word_factor));
  o.require(std::abs(w.improvement - 1.758) < 5e-4, fmt::format("improvement {:.4f}", w.improvement));

  const auto dir = env.work / "hetero_write";
  stt_sim(env, {"--config", config(env, "hetero_write").string(), "--out", dir.string(), "hetero-write"});
  double best_factor = 2, best = 0;
  std::string best_mode;
  for (const auto& r : csv_rows(dir / "hetero_write.csv")) {
    const double f = std::stod(r[1]);
    if (std::stoi(r[4]) != 23) continue;
    if (f < best_factor) best_factor = f, best = std::stod(r[11]), best_mode = r[0];
  }
  o.require(best >= 1.7, fmt::format("system write improvement {:.3f} < 1.7 for mode {}", best, best_mode));
  const double t = seconds_since(t0);
  o.require(t < 60, "runtime >= 1 min");
  o.note(fmt::format("word factor {:.5f} (x{:.3f}); most aggressive mode {} (energy x{}) gives system write x{:.3f}",
                     w.word_factor, w.improvement, best_mode, best_factor, best));
  return o;
}

Outcome c12_gradient_check(Env&) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  errortrain::TinyNetSpec net;
  net.layer_sizes = {6, 8, 5, 4};
  net.seed = 12;
  std::vector<double> x(10 * 6);
  std::vector<int> y(10);
  auto rng = make_stream(12, {});
  for (auto& v : x) v = 2 * uniform01(rng) - 1;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 4);
  const auto r = errortrain::gradient_check(net, x, y);
  o.require(r.max_relative_error < 1e-4, fmt::format("max relative error {:.3g}", r.max_relative_error));
  const double t = seconds_since(t0);
  o.require(t < 10, "runtime >= 10 s");
  o.note(fmt::format("{} parameters, max relative error {:.3g}", r.parameters, r.max_relative_error));
  return o;
}

Outcome c13_error_resilience(Env& env) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = env.work / "error_train";
  stt_sim(env, {"--config", config(env, "error_train").string(), "--out", dir.string(), "error-train"});
  const auto s = json::parse(slurp(dir / "error_train_summary.json"));
  const double base = s["baseline"]["mean_final_accuracy"].get<double>();
  const auto seeds = s["baseline"]["runs"];
  o.require(seeds.size() >= 3, "fewer than 3 seeds");
  const json* zero = nullptr;
  const json* mant = nullptr;
  const json* expo = nullptr;
  for (const auto& c : s["cells"]) {
    const auto seg = c["segment"].get<std::string>();
    const double wer = c["wer"].get<double>();
    if (seg == "mantissa" && wer == 0) zero = &c;
    if (seg == "mantissa" && wer == 1e-3 && c["bits"].get<int>() == 23) mant = &c;
    if (seg == "exponent" && wer == 1e-2) expo = &c;
  }
  if (!zero || !mant || !expo) {
    o.require(false, "bundled config lacks the zero, mantissa 1e-3 or exponent 1e-2 cell");
    return o;
  }
  for (const auto& r : seeds) {
    const auto k = r["seed"].get<std::uint64_t>();
    const auto a = slurp(dir / fmt::format("curves/baseline_seed{}.csv", k));
    const auto b = slurp(dir / fmt::format("curves/{}_seed{}.csv", (*zero)["name"].get<std::string>(), k));
    o.require(!a.empty() && a == b, fmt::format("zero-error curve differs from baseline for seed {}", k));
  }
  const double m = (*mant)["mean_final_accuracy"].get<double>();
  const double e = (*expo)["mean_final_accuracy"].get<double>();
  const bool diverged = (*expo)["diverged"].get<bool>();
  o.require(std::abs(base - m) <= 0.02, fmt::format("mantissa 1e-3 off baseline by {:.4f}", base - m));
  o.require(base - e > 0.10 || diverged, fmt::format("exponent 1e-2 only {:.4f} below baseline", base - e));
  const double t = seconds_since(t0);
  o.require(t < 900, "runtime >= 15 min");
  o.note(fmt::format("baseline {:.4f}; zero-error identical; mantissa 1e-3 {:.4f}; exponent 1e-2 {:.4f}{}; {:.1f} s",
                     base, m, e, diverged ? " (diverged)" : "", t));
  return o;
}

Outcome c14_reproducibility(Env& env) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  struct Run {
    std::string config, command;
    std::vector<std::string> overrides;
  };
  const Run runs[] = {
      {"switching_probability", "wer-sweep", {"simulation.trials=20"}},
      {"wer_ladder", "wer-sweep", {"simulation.trials=20"}},
      {"array_iso_capacity", "array-sweep", {}},
      {"array_iso_area", "array-sweep", {}},
      {"system_iso_capacity", "system-compare", {}},
      {"system_iso_area", "system-compare", {}},
      {"hetero_write", "hetero-write", {}},
      {"error_train", "error-train", {"network.epochs=2", "seeds=[1, 2]"}},
  };
  std::size_t files = 0;
  for (const auto& r : runs) {
    const auto a = env.work / "repro" / (r.config + "_a");
    const auto b = env.work / "repro" / (r.config + "_b");
    std::vector<std::string> args{"--config", config(env, r.config).string(), "--out", a.string()};
    for (const auto& s : r.overrides) args.insert(args.end(), {"--set", s});
    args.push_back(r.command);
    stt_sim(env, args);
    stt_sim(env, {"--manifest", (a / "manifest.json").string(), "--out", b.string()});
    const auto manifest = json::parse(slurp(a / "manifest.json"));
    for (const auto& f : manifest["outputs"]) {
      const auto name = f.get<std::string>();
      o.require(slurp(a / name) == slurp(b / name), r.config + ": " + name + " differs on replay");
      ++files;
    }
  }
  const double t = seconds_since(t0);
  o.require(t < 60, fmt::format("runtime {:.1f} s >= 1 min", t));
  o.note(fmt::format("{} commands, {} data files byte-identical on replay, {:.1f} s", std::size(runs), files, t));
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome(Env&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "WER identity", c1_wer_identity},
      {2, "thermal field statistics", c2_thermal_field},
      {3, "deterministic switching threshold", c3_deterministic_threshold},
      {4, "sigmoid and onset", c4_sigmoid_onset},
      {5, "ln(WER) linearity", c5_ln_wer_linearity},
      {6, "array anchors and iso-area ratios", c6_array_anchors},
      {7, "write-mode arithmetic", c7_write_modes},
      {8, "dataflow oracle equivalence", c8_dataflow_oracle},
      {9, "buffer monotonicity", c9_buffer_monotonicity},
      {10, "system energy trend", c10_system_trend},
      {11, "heterogeneous write energy", c11_hetero_write},
      {12, "gradient check", c12_gradient_check},
      {13, "error resilience", c13_error_resilience},
      {14, "manifest reproducibility", c14_reproducibility},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for stt_sim"};
  std::vector<int> selected;
  Env env;
  std::string source = STTSIM_SOURCE_DIR, work;
  env.workers = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--criterion", selected, "Run only these criteria (repeatable)")->check(CLI::Range(1, 14));
  app.add_option("--source-dir", source, "Repository root holding configs/ and data/")->capture_default_str();
  app.add_option("--work-dir", work, "Scratch directory for command outputs");
  app.add_option("--workers", env.workers, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  env.source = source;
  env.work = work.empty() ? fs::temp_directory_path() / fmt::format("sttsim_acceptance_{}", ::getpid()) : fs::path(work);
  fs::create_directories(env.work);

  bool all = true;
  for (const auto& c : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      o = c.run(env);
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("error: ") + e.what());
    }
    all = all && o.pass;
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::cout << fmt::format("{} criterion {:2d} ({}): {}\n", o.pass ? "PASS" : "FAIL", c.id, c.title, detail)
              << std::flush;
  }
  if (work.empty()) fs::remove_all(env.work);
  return all ? 0 : 1;
}
