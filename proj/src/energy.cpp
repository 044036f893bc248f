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

#include "sttsim/energy.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "sttsim/error.hpp"

namespace sttsim::energy {

using dataflow::kBuffers;
using dataflow::Phase;
using dataflow::Store;

void SystemEnergyConfig::validate() const {
  if (!(dram_energy_per_access_nj > 0 && dram_latency_ns > 0 && mac_energy_pj > 0 && clock_ghz > 0 &&
        dram_burst_elements > 0 && onchip_access_elements > 0)) {
    throw ConfigError("system energy constants must all be positive");
  }
}

std::string_view EnergyReport::dominant() const {
  std::string_view name = "dram";
  double best = dram_nj;
  if (onchip_access_nj > best) best = onchip_access_nj, name = "onchip_access";
  if (leakage_nj > best) best = leakage_nj, name = "leakage";
  if (compute_nj > best) name = "compute";
  return name;
}

EnergyReport estimate_energy(const dataflow::AccessTrace& trace, const BufferMetrics& buffers,
                             const SystemEnergyConfig& sys) {
  sys.validate();
  double leak_mw = 0.0;
  for (const auto& m : buffers) leak_mw += m.leakage_mw;

  EnergyReport r;
  for (const auto& rec : trace.records) {
    auto& p = r.per_phase[static_cast<std::size_t>(rec.phase)];
    double t = static_cast<double>(rec.cycles) / sys.clock_ghz;
    for (std::size_t i = 0; i < kBuffers.size(); ++i) {
      const auto& c = rec.at(kBuffers[i]);
      const double reads = static_cast<double>(c.reads) / sys.onchip_access_elements;
      const double writes = static_cast<double>(c.writes) / sys.onchip_access_elements;
      p.onchip_read_nj += reads * buffers[i].read_energy_pj * 1e-3;
      p.onchip_write_nj += writes * buffers[i].write_energy_pj * 1e-3;
      t += reads * buffers[i].read_latency_ns + writes * buffers[i].write_latency_ns;
    }
    const double dram = static_cast<double>(rec.at(Store::Dram).total()) / sys.dram_burst_elements;
    p.dram_nj += dram * sys.dram_energy_per_access_nj;
    t += dram * sys.dram_latency_ns;
    p.compute_nj += static_cast<double>(rec.macs) * sys.mac_energy_pj * 1e-3;
    p.time_ns += t;
    p.leakage_nj += leak_mw * 1e-3 * t;  // W * ns = nJ
  }
  for (const auto& p : r.per_phase) {
    r.dram_nj += p.dram_nj;
    r.onchip_access_nj += p.onchip_access_nj();
    r.onchip_write_nj += p.onchip_write_nj;
    r.leakage_nj += p.leakage_nj;
    r.compute_nj += p.compute_nj;
    r.time_ns += p.time_ns;
  }
  r.total_nj = r.dram_nj + r.onchip_access_nj + r.leakage_nj + r.compute_nj;
  return r;
}

EnergyReport estimate_energy(const dataflow::AccessTrace& trace, const arraymodel::ArrayMetrics& act,
                             const arraymodel::ArrayMetrics& wt, const arraymodel::ArrayMetrics& err,
                             const SystemEnergyConfig& sys) {
  return estimate_energy(trace, BufferMetrics{act, wt, err}, sys);
}

namespace {

SidePoint run_side(const dataflow::Workload& workload, dataflow::AcceleratorConfig accel,
                   const arraymodel::CalibrationTable& table, double buffer_kb,
                   const arraymodel::MemoryTechnology& tech, const SystemEnergyConfig& sys) {
  SidePoint s;
  s.buffer_kb = buffer_kb;
  s.metrics = arraymodel::metrics_at_capacity(table, tech, buffer_kb);
  accel.activation_buffer_kb = accel.weight_buffer_kb = accel.error_buffer_kb = buffer_kb;
  accel.clock_ghz = sys.clock_ghz;
  s.trace = dataflow::simulate_iteration(workload, accel);
  s.report = estimate_energy(s.trace, s.metrics, s.metrics, s.metrics, sys);
  return s;
}

}  // namespace

Comparison compare_iso_capacity(const dataflow::Workload& workload, const dataflow::AcceleratorConfig& accel,
                                const arraymodel::CalibrationTable& table, double buffer_kb,
                                const arraymodel::MemoryTechnology& tech_a,
                                const arraymodel::MemoryTechnology& tech_b, const SystemEnergyConfig& sys) {
  Comparison c;
  c.a = run_side(workload, accel, table, buffer_kb, tech_a, sys);
  c.b.buffer_kb = buffer_kb;
  c.b.metrics = arraymodel::metrics_at_capacity(table, tech_b, buffer_kb);
  c.b.trace = c.a.trace;
  c.b.report = estimate_energy(c.b.trace, c.b.metrics, c.b.metrics, c.b.metrics, sys);
  c.improvement = c.a.report.total_nj / c.b.report.total_nj;
  return c;
}

Comparison compare_iso_area(const dataflow::Workload& workload, const dataflow::AcceleratorConfig& accel,
                            const arraymodel::CalibrationTable& table, double buffer_area_mm2,
                            const arraymodel::MemoryTechnology& tech_a, const arraymodel::MemoryTechnology& tech_b,
                            const SystemEnergyConfig& sys) {
  Comparison c;
  c.a = run_side(workload, accel, table, arraymodel::capacity_at_area(table, tech_a, buffer_area_mm2), tech_a, sys);
  c.b = run_side(workload, accel, table, arraymodel::capacity_at_area(table, tech_b, buffer_area_mm2), tech_b, sys);
  c.improvement = c.a.report.total_nj / c.b.report.total_nj;
  return c;
}

void SegmentMap::validate() const {
  sign.validate();
  exponent.validate();
  mantissa.validate();
  if (mantissa_bits_on_optimized < 0 || mantissa_bits_on_optimized > 23) {
    throw ConfigError(fmt::format("mantissa bits on the optimized array must lie in [0, 23], got {}",
                                  mantissa_bits_on_optimized));
  }
}

std::array<int, 3> SegmentMap::widths() const {
  return {1, 8 + (23 - mantissa_bits_on_optimized), mantissa_bits_on_optimized};
}

HeteroWriteEnergy hetero_write_energy(const SegmentMap& map, double base_bit_energy_pj) {
  map.validate();
  if (!(base_bit_energy_pj > 0)) throw InvalidParameter("base bit energy must be positive");
  const auto w = map.widths();
  const std::array<const arraymodel::MemoryTechnology*, 3> techs = {&map.sign, &map.exponent, &map.mantissa};
  HeteroWriteEnergy h;
  for (std::size_t i = 0; i < 3; ++i) {
    h.per_word_pj += w[i] * base_bit_energy_pj * techs[i]->write_energy_factor;
    if (w[i] > 0) h.latency_factor = std::max(h.latency_factor, techs[i]->write_latency_factor);
  }
  h.word_factor = h.per_word_pj / (32.0 * base_bit_energy_pj);
  h.improvement = 32.0 * base_bit_energy_pj / h.per_word_pj;
  return h;
}

double system_write_energy_nj(const dataflow::AccessTrace& trace, const BufferMetrics& base, const SegmentMap& map,
                              double onchip_access_elements) {
  const double factor = hetero_write_energy(map, 1.0).word_factor;
  double e = 0.0;
  for (std::size_t i = 0; i < kBuffers.size(); ++i) {
    e += static_cast<double>(trace.count(kBuffers[i]).writes) / onchip_access_elements * base[i].write_energy_pj *
         factor * 1e-3;
  }
  return e;
}

}  // namespace sttsim::energy
