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

#include <cmath>
#include <map>
#include <optional>

#include "common.hpp"
#include "sttsim/parallel.hpp"

namespace sttsim::cli {

namespace {

struct Grid {
  double duration_ns;
  std::vector<double> amplitudes;
};

struct DefaultGrid {
  double duration_ns, from, to, step;
};

// Cover the sigmoid at the default device: onset near 120/80/60 uA.
constexpr DefaultGrid kDefaultGrids[] = {{5, 60, 330, 30}, {10, 40, 175, 15}, {20, 30, 102, 8}};

std::vector<double> arange(double from, double to, double step) {
  std::vector<double> v;
  for (double x = from; x <= to + 1e-9; x += step) v.push_back(x);
  return v;
}

}  // namespace

CommandOutput cmd_wer_sweep(config::Section& root, Context& ctx) {
  CommandOutput res;
  json& cfg = res.resolved;
  cfg["seed"] = root.get<std::uint64_t>("seed", 1);
  const auto device = parse_device(root, cfg);
  auto sim = parse_simulation(root, cfg["seed"].get<std::uint64_t>(), 1, cfg);

  std::vector<Grid> grids;
  if (root.has("grids")) {
    json out = json::array();
    for (auto& g : root.children("grids")) {
      json j;
      Grid grid{g.require<double>("duration_ns"), {}};
      if (!(grid.duration_ns > 0)) g.fail_key("duration_ns", "must be positive");
      grid.amplitudes = parse_grid(g, "amplitudes_ua", {}, j);
      g.finish();
      out.push_back({{"duration_ns", grid.duration_ns}, {"amplitudes_ua", j["amplitudes_ua"]}});
      grids.push_back(std::move(grid));
    }
    if (grids.empty()) root.fail_key("grids", "must not be empty");
    cfg["grids"] = out;
  } else if (root.has("durations_ns") || root.has("amplitudes_ua")) {
    json j;
    const auto durations = parse_grid(root, "durations_ns", {}, j);
    const auto amplitudes = parse_grid(root, "amplitudes_ua", {}, j);
    json out = json::array();
    for (double d : durations) {
      if (!(d > 0)) root.fail_key("durations_ns", "entries must be positive");
      grids.push_back({d, amplitudes});
      out.push_back({{"duration_ns", d}, {"amplitudes_ua", amplitudes}});
    }
    cfg["grids"] = out;
  } else {
    json out = json::array();
    for (const auto& d : kDefaultGrids) {
      grids.push_back({d.duration_ns, arange(d.from, d.to, d.step)});
      out.push_back({{"duration_ns", d.duration_ns}, {"amplitudes_ua", grids.back().amplitudes}});
    }
    cfg["grids"] = out;
  }
  for (const auto& g : grids) {
    for (double a : g.amplitudes) {
      if (!(a >= 0)) root.fail("amplitudes must be non-negative", root.node());
    }
  }

  json jt;
  const auto targets = parse_grid(root, "targets", {1e-5, 1e-6, 1e-7, 1e-8, 1e-9, magnetics::kBaselineWer}, jt);
  for (double t : targets) {
    if (!(t > 0 && t < 1)) root.fail_key("targets", "entries must lie in (0, 1)");
  }
  cfg["targets"] = targets;

  magnetics::WritePulse baseline{0.0, 10.0};
  double baseline_wer = magnetics::kBaselineWer;
  if (auto b = root.child("baseline")) {
    baseline.duration_ns = b->get("duration_ns", baseline.duration_ns);
    baseline_wer = b->get("target_wer", baseline_wer);
    b->finish();
    if (!(baseline.duration_ns > 0)) b->fail_key("duration_ns", "must be positive");
    if (!(baseline_wer > 0 && baseline_wer < 1)) b->fail_key("target_wer", "must lie in (0, 1)");
  }
  cfg["baseline"] = {{"duration_ns", baseline.duration_ns}, {"target_wer", baseline_wer}};
  std::optional<double> resistance;
  if (root.has("effective_resistance_ohm")) {
    resistance = root.require<double>("effective_resistance_ohm");
    if (!(*resistance > 0)) root.fail_key("effective_resistance_ohm", "must be positive");
    cfg["effective_resistance_ohm"] = *resistance;
  }
  root.raw("effective_resistance_ohm");
  root.finish();

  // Every point reuses the same trial streams (common random numbers), which
  // keeps each sigmoid monotone up to integration noise.
  magnetics::WerCurve curve;
  for (const auto& g : grids) {
    for (double a : g.amplitudes) curve.points.push_back({a, g.duration_ns, 0.0, sim.trials});
  }
  parallel_for(curve.points.size(), ctx.workers, [&](std::size_t i) {
    auto& p = curve.points[i];
    p.p_switch = magnetics::estimate_psw(device, {p.amplitude_ua, p.duration_ns}, sim);
  });

  std::string csv = csv_preamble() + "amplitude_uA,duration_ns,trials,p_switch,ln_wer\n";
  for (const auto& p : curve.points) {
    const double wer = magnetics::wer_from_psw(p.p_switch);
    csv += fmt::format("{},{},{},{},{}\n", num(p.amplitude_ua), num(p.duration_ns), p.trials, num(p.p_switch),
                       num(wer > 0 ? std::log(wer) : -INFINITY));
  }
  res.files.push_back({"wer_sweep.csv", csv});

  std::map<double, magnetics::LnWerFit> fits;
  json fits_json = json::array();
  for (const auto& g : grids) {
    if (fits.count(g.duration_ns)) continue;
    try {
      const auto fit = magnetics::fit_ln_wer(curve, g.duration_ns);
      fits[g.duration_ns] = fit;
      fits_json.push_back({{"duration_ns", g.duration_ns},
                           {"slope_per_ua", fit.slope},
                           {"intercept", fit.intercept},
                           {"r_squared", fit.r_squared},
                           {"points_used", fit.points_used}});
    } catch (const Error& e) {
      fits_json.push_back({{"duration_ns", g.duration_ns}, {"error", e.what()}});
    }
  }

  json base_json = {{"duration_ns", baseline.duration_ns}, {"target_wer", baseline_wer}};
  bool have_baseline = false;
  if (auto it = fits.find(baseline.duration_ns); it != fits.end()) {
    try {
      baseline.amplitude_ua = magnetics::required_amplitude(it->second, baseline_wer);
      have_baseline = baseline.amplitude_ua > 0;
      base_json["amplitude_ua"] = baseline.amplitude_ua;
    } catch (const Error& e) {
      base_json["error"] = e.what();
    }
  } else {
    base_json["error"] = "no usable fit at the baseline duration";
  }
  if (have_baseline && resistance) {
    base_json["energy_pj"] = baseline.amplitude_ua * baseline.amplitude_ua * 1e-12 * *resistance *
                             baseline.duration_ns * 1e-9 * 1e12;
  }

  json ladder = json::array();
  std::string ladder_csv = csv_preamble() + "duration_ns,target_wer,amplitude_uA,energy_factor,latency_factor" +
                           (resistance ? ",energy_pj" : "") + ",status\n";
  for (const auto& [duration, fit] : fits) {
    for (double t : targets) {
      json row = {{"duration_ns", duration}, {"target_wer", t}};
      std::string line = num(duration) + "," + num(t) + ",";
      try {
        const double amp = magnetics::required_amplitude(fit, t);
        const magnetics::WritePulse pulse{std::max(amp, 0.0), duration};
        row["amplitude_ua"] = amp;
        line += num(amp) + ",";
        if (have_baseline) {
          const double ef = magnetics::relative_write_energy(pulse, baseline);
          const double lf = duration / baseline.duration_ns;
          row["energy_factor"] = ef;
          row["latency_factor"] = lf;
          line += num(ef) + "," + num(lf);
        } else {
          line += ",";
        }
        if (resistance) {
          const double e_pj = pulse.amplitude_ua * pulse.amplitude_ua * 1e-12 * *resistance * duration * 1e-9 * 1e12;
          row["energy_pj"] = e_pj;
          line += "," + num(e_pj);
        }
        line += ",ok";
      } catch (const Error& e) {
        row["error"] = e.what();
        line += ",," + std::string(resistance ? "," : "") + ",error";
      }
      ladder.push_back(row);
      ladder_csv += line + "\n";
    }
  }
  res.files.push_back({"wer_ladder.csv", ladder_csv});
  json ladder_doc = {{"manifest", kManifestName}, {"baseline", base_json}, {"fits", fits_json}, {"ladder", ladder}};
  res.files.push_back({"wer_ladder.json", ladder_doc.dump(2) + "\n"});

  res.summary = fmt::format("{} points, {} of {} fits", curve.points.size(), fits.size(), fits_json.size());
  return res;
}

}  // namespace sttsim::cli
