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

#include "sttsim/arraymodel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sttsim/error.hpp"

namespace sttsim::arraymodel {

namespace {

constexpr double kGuardBand = 2.0;

// Metric accessors in CSV column order after capacity.
using Field = double ArrayMetrics::*;
constexpr std::array<Field, 6> kInterpolated = {
    &ArrayMetrics::area_mm2,       &ArrayMetrics::read_latency_ns, &ArrayMetrics::write_latency_ns,
    &ArrayMetrics::read_energy_pj, &ArrayMetrics::write_energy_pj, &ArrayMetrics::leakage_mw};

constexpr std::string_view kHeader =
    "technology,capacity_kb,area_mm2,read_latency_ns,write_latency_ns,read_energy_pj,write_energy_pj,leakage_mw";

std::string_view family_name(AnchorFamily f) { return f == AnchorFamily::Sram ? "SRAM" : "MRAM"; }

ArrayMetrics anchor(double cap, double area, double rl, double wl, double re, double we, double leak) {
  return ArrayMetrics{cap, area, rl, wl, re, we, leak, 0.0};
}

double lerp_log(double x0, double y0, double x1, double y1, double x) {
  const double t = std::log(x / x0) / std::log(x1 / x0);
  return std::exp(std::log(y0) + t * (std::log(y1) - std::log(y0)));
}

// Bracketing pair for log-log interpolation; edge segments serve the guard band.
std::size_t segment_for(const std::vector<ArrayMetrics>& a, double cap) {
  std::size_t i = 0;
  while (i + 2 < a.size() && cap > a[i + 1].capacity_kb) ++i;
  return i;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_string(TechnologyKind kind) {
  switch (kind) {
    case TechnologyKind::Sram: return "SRAM";
    case TechnologyKind::MramBase: return "MRAM_BASE";
    case TechnologyKind::MramLowVoltage: return "MRAM_LOW_VOLTAGE";
    case TechnologyKind::MramLowDuration: return "MRAM_LOW_DURATION";
    case TechnologyKind::MramCustom: return "MRAM_CUSTOM";
  }
  return "?";
}

TechnologyKind technology_kind_from_string(std::string_view name) {
  for (auto k : {TechnologyKind::Sram, TechnologyKind::MramBase, TechnologyKind::MramLowVoltage,
                 TechnologyKind::MramLowDuration, TechnologyKind::MramCustom}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError(fmt::format("unknown technology '{}'", name));
}

AnchorFamily anchor_family(TechnologyKind kind) {
  return kind == TechnologyKind::Sram ? AnchorFamily::Sram : AnchorFamily::Mram;
}

void MemoryTechnology::validate() const {
  auto in_unit = [](double f) { return f > 0.0 && f <= 1.0; };
  if (!in_unit(write_latency_factor) || !in_unit(write_energy_factor)) {
    throw ConfigError(fmt::format("{}: write factors must lie in (0, 1], got latency {} energy {}", to_string(kind),
                                  write_latency_factor, write_energy_factor));
  }
  if (!(wer >= 0.0 && wer < 1.0)) {
    throw ConfigError(fmt::format("{}: WER must lie in [0, 1), got {}", to_string(kind), wer));
  }
  if (kind == TechnologyKind::Sram || kind == TechnologyKind::MramBase) {
    if (write_latency_factor != 1.0 || write_energy_factor != 1.0) {
      throw ConfigError(fmt::format("{} must have unit write factors", to_string(kind)));
    }
  }
  if (kind == TechnologyKind::Sram && wer != 0.0) throw ConfigError("SRAM must have WER 0");
  if (kind != TechnologyKind::Sram && write_energy_factor < 1.0 && !(wer > magnetics::kBaselineWer)) {
    throw ConfigError(fmt::format("{}: a cheaper write must raise the WER above the baseline {}", to_string(kind),
                                  magnetics::kBaselineWer));
  }
}

MemoryTechnology MemoryTechnology::sram() { return {TechnologyKind::Sram, 1.0, 1.0, 0.0}; }
MemoryTechnology MemoryTechnology::mram_base() {
  return {TechnologyKind::MramBase, 1.0, 1.0, magnetics::kBaselineWer};
}
MemoryTechnology MemoryTechnology::mram_low_voltage() { return {TechnologyKind::MramLowVoltage, 0.47, 0.40, 8e-4}; }
MemoryTechnology MemoryTechnology::mram_low_duration() { return {TechnologyKind::MramLowDuration, 0.47, 0.40, 8e-4}; }

MemoryTechnology MemoryTechnology::named(TechnologyKind kind) {
  switch (kind) {
    case TechnologyKind::Sram: return sram();
    case TechnologyKind::MramBase: return mram_base();
    case TechnologyKind::MramLowVoltage: return mram_low_voltage();
    case TechnologyKind::MramLowDuration: return mram_low_duration();
    case TechnologyKind::MramCustom: break;
  }
  throw ConfigError("MRAM_CUSTOM has no named defaults; give its factors and WER explicitly");
}

bool operator==(const MemoryTechnology& a, const MemoryTechnology& b) {
  return a.kind == b.kind && a.write_latency_factor == b.write_latency_factor &&
         a.write_energy_factor == b.write_energy_factor && a.wer == b.wer;
}

bool operator==(const ArrayMetrics& a, const ArrayMetrics& b) {
  return a.capacity_kb == b.capacity_kb && a.area_mm2 == b.area_mm2 && a.read_latency_ns == b.read_latency_ns &&
         a.write_latency_ns == b.write_latency_ns && a.read_energy_pj == b.read_energy_pj &&
         a.write_energy_pj == b.write_energy_pj && a.leakage_mw == b.leakage_mw && a.wer == b.wer;
}

CalibrationTable::CalibrationTable(std::map<AnchorFamily, std::vector<ArrayMetrics>> anchors)
    : anchors_(std::move(anchors)) {
  for (const auto& [family, list] : anchors_) {
    if (list.size() < 2) {
      throw ConfigError(fmt::format("{}: calibration needs at least 2 anchors", family_name(family)));
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& m = list[i];
      if (!(m.capacity_kb > 0)) throw ConfigError(fmt::format("{}: capacity must be positive", family_name(family)));
      for (Field f : kInterpolated) {
        if (!(m.*f > 0)) {
          throw ConfigError(fmt::format("{} @ {} KB: metrics must be strictly positive", family_name(family),
                                        m.capacity_kb));
        }
      }
      if (i > 0 && !(m.capacity_kb > list[i - 1].capacity_kb)) {
        throw ConfigError(fmt::format("{}: anchor capacities must be strictly increasing", family_name(family)));
      }
      if (i > 0 && !(m.area_mm2 > list[i - 1].area_mm2)) {
        throw ConfigError(fmt::format("{}: anchor areas must grow with capacity", family_name(family)));
      }
    }
  }
}

const std::vector<ArrayMetrics>& CalibrationTable::anchors(AnchorFamily family) const {
  auto it = anchors_.find(family);
  if (it == anchors_.end()) {
    throw ConfigError(fmt::format("calibration table has no {} anchors", family_name(family)));
  }
  return it->second;
}

const CalibrationTable& builtin_calibration() {
  static const CalibrationTable table({
      {AnchorFamily::Sram,
       {
           anchor(32, 0.1145, 0.05603, 0.02776, 0.03934, 0.04266, 131.0),
           anchor(128, 0.3696, 0.1541, 0.0769, 0.08259, 0.08398, 435.7),
           anchor(183, 0.5, 0.2, 0.1, 0.1, 0.1, 594),
           anchor(512, 1.193, 0.4237, 0.213, 0.1734, 0.1653, 1449.0),
           anchor(2048, 3.852, 1.165, 0.5901, 0.3641, 0.3254, 4822.0),
           anchor(8192, 12.43, 3.204, 1.635, 0.7645, 0.6406, 16040.0),
           anchor(32768, 40.14, 8.81, 4.528, 1.605, 1.261, 53370.0),
           anchor(40592, 48.1, 10.3, 5.3, 1.8, 1.4, 64257),
           anchor(131072, 129.6, 24.23, 12.54, 3.37, 2.482, 177500.0),
           anchor(524288, 418.2, 66.62, 34.75, 7.076, 4.886, 590700.0),
       }},
      {AnchorFamily::Mram,
       {
           anchor(32, 0.2957, 1.569, 8.195, 0.1299, 1.139, 48.09),
           anchor(128, 0.3696, 2.275, 9.143, 0.1974, 1.307, 124.6),
           anchor(512, 0.5, 3.3, 10.2, 0.3, 1.5, 323),
           anchor(2048, 1.566, 4.786, 11.38, 0.4559, 1.721, 837.1),
           anchor(8192, 4.904, 6.941, 12.69, 0.6928, 1.975, 2170.0),
           anchor(32768, 15.36, 10.07, 14.16, 1.053, 2.266, 5623.0),
           anchor(131072, 48.1, 14.6, 15.8, 1.6, 2.6, 14573),
           anchor(524288, 150.6, 21.17, 17.63, 2.431, 2.983, 37770.0),
           anchor(1048576, 266.6, 25.5, 18.62, 2.997, 3.196, 60800.0),
       }},
  });
  return table;
}

CalibrationTable parse_calibration(std::istream& in, const std::string& source_name) {
  std::map<AnchorFamily, std::vector<ArrayMetrics>> anchors;
  std::map<AnchorFamily, int> last_line;
  std::string raw;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kHeader) throw ConfigError(fmt::format("expected header '{}'", kHeader), source_name, line_no);
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> cells;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 8) {
      throw ConfigError(fmt::format("expected 8 fields, got {}", cells.size()), source_name, line_no);
    }
    AnchorFamily family;
    if (cells[0] == "SRAM") {
      family = AnchorFamily::Sram;
    } else if (cells[0] == "MRAM") {
      family = AnchorFamily::Mram;
    } else {
      throw ConfigError(fmt::format("unknown technology '{}' (expected SRAM or MRAM)", cells[0]), source_name,
                        line_no);
    }
    std::array<double, 7> v{};
    for (std::size_t i = 0; i < 7; ++i) {
      const auto cell = cells[i + 1];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v[i]);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v[i])) {
        throw ConfigError(fmt::format("field {} is not a number: '{}'", i + 2, cell), source_name, line_no);
      }
      if (!(v[i] > 0)) throw ConfigError(fmt::format("field {} must be positive", i + 2), source_name, line_no);
    }
    auto& list = anchors[family];
    if (!list.empty() && !(v[0] > list.back().capacity_kb)) {
      throw ConfigError("capacities must be strictly increasing per technology", source_name, line_no);
    }
    if (!list.empty() && !(v[1] > list.back().area_mm2)) {
      throw ConfigError("area must grow with capacity", source_name, line_no);
    }
    list.push_back(anchor(v[0], v[1], v[2], v[3], v[4], v[5], v[6]));
    last_line[family] = line_no;
  }
  if (!header_seen) throw ConfigError("calibration file is empty", source_name);
  if (anchors.empty()) throw ConfigError("calibration file has no anchors", source_name);
  for (const auto& [family, list] : anchors) {
    if (list.size() < 2) {
      throw ConfigError(fmt::format("{} needs at least 2 anchors", family_name(family)), source_name,
                        last_line[family]);
    }
  }
  return CalibrationTable(std::move(anchors));
}

CalibrationTable load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file", path);
  return parse_calibration(in, path);
}

void write_calibration(std::ostream& out, const CalibrationTable& table) {
  out << kHeader << '\n';
  for (auto family : {AnchorFamily::Sram, AnchorFamily::Mram}) {
    for (const auto& m : table.anchors(family)) {
      out << fmt::format("{},{},{},{},{},{},{},{}\n", family_name(family), m.capacity_kb, m.area_mm2,
                         m.read_latency_ns, m.write_latency_ns, m.read_energy_pj, m.write_energy_pj, m.leakage_mw);
    }
  }
}

ArrayMetrics metrics_at_capacity(const CalibrationTable& table, const MemoryTechnology& tech, double capacity_kb) {
  if (table.empty()) throw ConfigError("calibration table is empty");
  tech.validate();
  const auto& a = table.anchors(anchor_family(tech.kind));
  const double lo = a.front().capacity_kb / kGuardBand;
  const double hi = a.back().capacity_kb * kGuardBand;
  if (!(capacity_kb >= lo && capacity_kb <= hi)) {
    throw OutOfRange(fmt::format("{}: capacity {} KB outside calibrated range [{}, {}] KB", to_string(tech.kind),
                                 capacity_kb, lo, hi));
  }
  ArrayMetrics m;
  auto exact = std::find_if(a.begin(), a.end(), [&](const ArrayMetrics& x) { return x.capacity_kb == capacity_kb; });
  if (exact != a.end()) {
    m = *exact;
  } else {
    const std::size_t i = segment_for(a, capacity_kb);
    const auto& p = a[i];
    const auto& q = a[i + 1];
    m.capacity_kb = capacity_kb;
    for (Field f : kInterpolated) m.*f = lerp_log(p.capacity_kb, p.*f, q.capacity_kb, q.*f, capacity_kb);
  }
  m.wer = 0.0;
  if (tech.kind == TechnologyKind::Sram) return m;
  return apply_write_mode(m, tech);
}

double capacity_at_area(const CalibrationTable& table, const MemoryTechnology& tech, double area_mm2) {
  if (table.empty()) throw ConfigError("calibration table is empty");
  const auto& a = table.anchors(anchor_family(tech.kind));
  if (!(area_mm2 >= a.front().area_mm2 && area_mm2 <= a.back().area_mm2)) {
    throw OutOfRange(fmt::format("{}: area {} mm^2 outside anchored range [{}, {}] mm^2", to_string(tech.kind),
                                 area_mm2, a.front().area_mm2, a.back().area_mm2));
  }
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    if (area_mm2 == a[i].area_mm2) return a[i].capacity_kb;
    if (area_mm2 <= a[i + 1].area_mm2) {
      if (area_mm2 == a[i + 1].area_mm2) return a[i + 1].capacity_kb;
      return lerp_log(a[i].area_mm2, a[i].capacity_kb, a[i + 1].area_mm2, a[i + 1].capacity_kb, area_mm2);
    }
  }
  return a.back().capacity_kb;
}

ArrayMetrics apply_write_mode(const ArrayMetrics& base, const MemoryTechnology& tech) {
  tech.validate();
  ArrayMetrics m = base;
  m.write_latency_ns = base.write_latency_ns * tech.write_latency_factor;
  m.write_energy_pj = base.write_energy_pj * tech.write_energy_factor;
  m.wer = tech.wer;
  return m;
}

MemoryTechnology derive_custom_mode(const magnetics::LnWerFit& fit, const magnetics::WritePulse& baseline,
                                    const magnetics::WritePulse& pulse) {
  if (!(fit.slope < 0.0)) throw InvalidFit("ln(WER) fit slope must be negative");
  baseline.validate();
  pulse.validate();
  if (baseline.duration_ns == fit.duration_ns) {
    const double ln_base = fit.slope * baseline.amplitude_ua + fit.intercept;
    if (std::abs(ln_base - std::log(magnetics::kBaselineWer)) > 1e-6) {
      throw InvalidParameter(fmt::format("baseline pulse gives WER {} under the fit, expected {}", std::exp(ln_base),
                                         magnetics::kBaselineWer));
    }
  }
  MemoryTechnology t;
  t.kind = TechnologyKind::MramCustom;
  t.write_latency_factor = pulse.duration_ns / baseline.duration_ns;
  t.write_energy_factor = magnetics::relative_write_energy(pulse, baseline);
  const double wer = std::exp(fit.slope * pulse.amplitude_ua + fit.intercept);
  t.wer = std::clamp(wer, 0.0, std::nextafter(1.0, 0.0));
  if (!(t.write_latency_factor <= 1.0 && t.write_energy_factor <= 1.0)) {
    throw InvalidParameter("custom write pulse must not cost more than the baseline pulse");
  }
  return t;
}

}  // namespace sttsim::arraymodel
