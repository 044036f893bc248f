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

/**
 * @file energy.hpp
 * @brief System energy of one training iteration: DRAM traffic, on-chip
 *        accesses, buffer leakage over the serialized run time, and MACs.
 */

#pragma once

#include <array>

#include "sttsim/arraymodel.hpp"
#include "sttsim/dataflow.hpp"

namespace sttsim::energy {

struct SystemEnergyConfig {
  double dram_energy_per_access_nj = 20.0;  // one 64-byte DDR3 burst
  double dram_latency_ns = 50.0;
  double mac_energy_pj = 2.5;
  double clock_ghz = 1.0;
  double dram_burst_elements = 16.0;        // binary32 elements per DRAM access
  double onchip_access_elements = 1.0;      // binary32 elements per array access

  void validate() const;
};

struct EnergyParts {
  double dram_nj = 0.0;
  double onchip_read_nj = 0.0;
  double onchip_write_nj = 0.0;
  double leakage_nj = 0.0;
  double compute_nj = 0.0;
  double time_ns = 0.0;

  double onchip_access_nj() const { return onchip_read_nj + onchip_write_nj; }
  double total_nj() const { return dram_nj + onchip_access_nj() + leakage_nj + compute_nj; }
};

struct EnergyReport {
  double dram_nj = 0.0;
  double onchip_access_nj = 0.0;
  double onchip_write_nj = 0.0;
  double leakage_nj = 0.0;
  double compute_nj = 0.0;
  double total_nj = 0.0;
  double time_ns = 0.0;
  std::array<EnergyParts, 4> per_phase{};  // indexed by dataflow::Phase

  /// Name of the largest of the four components.
  std::string_view dominant() const;
};

/// Buffer metrics in kBuffers order: activation, weight, error.
using BufferMetrics = std::array<arraymodel::ArrayMetrics, 3>;

EnergyReport estimate_energy(const dataflow::AccessTrace& trace, const BufferMetrics& buffers,
                             const SystemEnergyConfig& sys);
EnergyReport estimate_energy(const dataflow::AccessTrace& trace, const arraymodel::ArrayMetrics& act,
                             const arraymodel::ArrayMetrics& wt, const arraymodel::ArrayMetrics& err,
                             const SystemEnergyConfig& sys);

struct SidePoint {
  double buffer_kb = 0.0;
  arraymodel::ArrayMetrics metrics;
  dataflow::AccessTrace trace;
  EnergyReport report;
};

struct Comparison {
  SidePoint a;
  SidePoint b;
  /// total(a) / total(b): above 1 means b needs less energy.
  double improvement = 0.0;
};

/// Every buffer has `buffer_kb` for both technologies, so both sides share one
/// trace. `accel`'s buffer sizes are overridden; its array shape is kept.
Comparison compare_iso_capacity(const dataflow::Workload& workload, const dataflow::AcceleratorConfig& accel,
                                const arraymodel::CalibrationTable& table, double buffer_kb,
                                const arraymodel::MemoryTechnology& tech_a,
                                const arraymodel::MemoryTechnology& tech_b, const SystemEnergyConfig& sys);

/// Every buffer gets `buffer_area_mm2`; each technology resolves the capacity
/// that fits and runs its own trace.
Comparison compare_iso_area(const dataflow::Workload& workload, const dataflow::AcceleratorConfig& accel,
                            const arraymodel::CalibrationTable& table, double buffer_area_mm2,
                            const arraymodel::MemoryTechnology& tech_a, const arraymodel::MemoryTechnology& tech_b,
                            const SystemEnergyConfig& sys);

/// Bit segments of a binary32 word. The lowest `mantissa_bits_on_optimized`
/// mantissa bits use `mantissa`; the remaining upper mantissa bits stay with
/// `exponent`.
struct SegmentMap {
  arraymodel::MemoryTechnology sign = arraymodel::MemoryTechnology::mram_base();
  arraymodel::MemoryTechnology exponent = arraymodel::MemoryTechnology::mram_base();
  arraymodel::MemoryTechnology mantissa = arraymodel::MemoryTechnology::mram_base();
  int mantissa_bits_on_optimized = 23;

  void validate() const;
  /// Bits per technology slot: sign, exponent (incl. upper mantissa), optimized mantissa.
  std::array<int, 3> widths() const;
};

struct HeteroWriteEnergy {
  double per_word_pj = 0.0;
  double improvement = 0.0;
  /// per_word / (32 * base_bit_energy)
  double word_factor = 0.0;
  /// Segments write in parallel, so the word finishes with the slowest one.
  double latency_factor = 0.0;
};

HeteroWriteEnergy hetero_write_energy(const SegmentMap& map, double base_bit_energy_pj);

/// On-chip write energy of a trace written through a segment map over the
/// baseline MRAM buffer metrics.
double system_write_energy_nj(const dataflow::AccessTrace& trace, const BufferMetrics& base,
                              const SegmentMap& map, double onchip_access_elements = 1.0);

}  // namespace sttsim::energy
