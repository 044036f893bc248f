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

#include <gtest/gtest.h>

#include "sttsim/energy.hpp"
#include "sttsim/error.hpp"

using namespace sttsim;
using namespace sttsim::energy;
using arraymodel::ArrayMetrics;
using arraymodel::MemoryTechnology;
using dataflow::AccessTrace;
using dataflow::LayerPhaseRecord;
using dataflow::Phase;
using dataflow::Store;

namespace {

ArrayMetrics metrics(double rl, double wl, double re, double we, double leak) {
  ArrayMetrics m;
  m.capacity_kb = 64;
  m.area_mm2 = 1;
  m.read_latency_ns = rl;
  m.write_latency_ns = wl;
  m.read_energy_pj = re;
  m.write_energy_pj = we;
  m.leakage_mw = leak;
  return m;
}

dataflow::Workload toy4() {
  using dataflow::LayerSpec;
  return {LayerSpec::conv(8, 1, 8, 8, 4, 3, 1, 1), LayerSpec::conv(8, 4, 8, 8, 8, 3, 2, 1), LayerSpec::fc(8, 128, 32),
          LayerSpec::fc(8, 32, 10)};
}

AccessTrace sample_trace() {
  AccessTrace t;
  LayerPhaseRecord f{0, Phase::Forward};
  f.at(Store::Activation) = {100, 40};
  f.at(Store::Weight) = {80, 0};
  f.at(Store::Dram) = {32, 0};
  f.macs = 500;
  f.cycles = 60;
  LayerPhaseRecord b{0, Phase::BackwardInputGrad};
  b.at(Store::Error) = {30, 20};
  b.at(Store::Weight) = {10, 0};
  b.at(Store::Dram) = {0, 16};
  b.macs = 200;
  b.cycles = 25;
  LayerPhaseRecord u{0, Phase::WeightUpdate};
  u.at(Store::Weight) = {12, 12};
  u.at(Store::Error) = {12, 0};
  t.records = {f, b, u};
  return t;
}

const BufferMetrics kBuffers = {metrics(1.0, 2.0, 0.5, 0.8, 10), metrics(1.5, 3.0, 0.4, 1.2, 20),
                                metrics(0.7, 0.9, 0.3, 0.6, 5)};

}  // namespace

TEST(Energy, LeakageOverOneMicrosecond) {
  AccessTrace t;
  LayerPhaseRecord r{0, Phase::Forward};
  r.cycles = 1000;
  t.records = {r};
  const BufferMetrics buf = {metrics(1, 1, 1, 1, 323), metrics(1, 1, 1, 1, 0), metrics(1, 1, 1, 1, 0)};
  const auto rep = estimate_energy(t, buf, SystemEnergyConfig{});
  EXPECT_DOUBLE_EQ(rep.time_ns, 1000.0);
  EXPECT_NEAR(rep.leakage_nj, 323.0, 1e-9);
  EXPECT_EQ(rep.dram_nj, 0.0);
  EXPECT_EQ(rep.onchip_access_nj, 0.0);
}

TEST(Energy, ComponentsByHand) {
  SystemEnergyConfig sys;
  const auto t = sample_trace();
  const auto rep = estimate_energy(t, kBuffers, sys);
  EXPECT_NEAR(rep.dram_nj, 48.0 / 16.0 * 20.0, 1e-12);
  EXPECT_NEAR(rep.compute_nj, 700 * 2.5e-3, 1e-12);
  const double reads = 100 * 0.5 + (80 + 10 + 12) * 0.4 + (30 + 12) * 0.3;
  const double writes = 40 * 0.8 + 12 * 1.2 + 20 * 0.6;
  EXPECT_NEAR(rep.onchip_access_nj, (reads + writes) * 1e-3, 1e-12);
  EXPECT_NEAR(rep.onchip_write_nj, writes * 1e-3, 1e-12);
  const double time = 85.0 + (100 * 1.0 + 40 * 2.0) + (102 * 1.5 + 12 * 3.0) + (42 * 0.7 + 20 * 0.9) + 3 * 50.0;
  EXPECT_NEAR(rep.time_ns, time, 1e-9);
  EXPECT_NEAR(rep.leakage_nj, 35e-3 * time, 1e-9);
  EXPECT_NEAR(rep.time_ns, dataflow::total_time(t, dataflow::AcceleratorConfig{}, kBuffers, 50.0, 16.0), 1e-9);
}

TEST(Energy, PhasesAddUpToTotals) {
  const auto rep = estimate_energy(sample_trace(), kBuffers, SystemEnergyConfig{});
  EnergyParts sum;
  for (const auto& p : rep.per_phase) {
    sum.dram_nj += p.dram_nj;
    sum.onchip_read_nj += p.onchip_read_nj;
    sum.onchip_write_nj += p.onchip_write_nj;
    sum.leakage_nj += p.leakage_nj;
    sum.compute_nj += p.compute_nj;
    sum.time_ns += p.time_ns;
  }
  EXPECT_NEAR(sum.dram_nj, rep.dram_nj, 1e-9);
  EXPECT_NEAR(sum.onchip_access_nj(), rep.onchip_access_nj, 1e-9);
  EXPECT_NEAR(sum.leakage_nj, rep.leakage_nj, 1e-9);
  EXPECT_NEAR(sum.compute_nj, rep.compute_nj, 1e-9);
  EXPECT_NEAR(sum.time_ns, rep.time_ns, 1e-9);
  EXPECT_NEAR(rep.total_nj, rep.dram_nj + rep.onchip_access_nj + rep.leakage_nj + rep.compute_nj, 1e-9);
  EXPECT_EQ(rep.per_phase[static_cast<std::size_t>(Phase::BackwardWeightGrad)].total_nj(), 0.0);
}

TEST(Energy, RepeatedTraceDoublesEveryComponent) {
  const auto once = sample_trace();
  auto twice = once;
  twice.records.insert(twice.records.end(), once.records.begin(), once.records.end());
  const auto a = estimate_energy(once, kBuffers, SystemEnergyConfig{});
  const auto b = estimate_energy(twice, kBuffers, SystemEnergyConfig{});
  EXPECT_NEAR(b.dram_nj, 2 * a.dram_nj, 1e-9);
  EXPECT_NEAR(b.onchip_access_nj, 2 * a.onchip_access_nj, 1e-9);
  EXPECT_NEAR(b.compute_nj, 2 * a.compute_nj, 1e-9);
  EXPECT_NEAR(b.leakage_nj, 2 * a.leakage_nj, 1e-9);
  EXPECT_NEAR(b.time_ns, 2 * a.time_ns, 1e-9);
}

TEST(Energy, DramEnergyLinearInAccesses) {
  SystemEnergyConfig sys;
  sys.dram_burst_elements = 1;
  for (std::uint64_t n : {1u, 7u, 1000u}) {
    AccessTrace t;
    LayerPhaseRecord r{0, Phase::Forward};
    r.at(Store::Dram) = {n, n};
    t.records = {r};
    EXPECT_NEAR(estimate_energy(t, kBuffers, sys).dram_nj, 2.0 * n * 20.0, 1e-9);
  }
}

TEST(Energy, SystemConfigValidation) {
  SystemEnergyConfig sys;
  sys.dram_latency_ns = 0;
  EXPECT_THROW(sys.validate(), ConfigError);
  sys = {};
  sys.onchip_access_elements = -1;
  EXPECT_THROW(estimate_energy(sample_trace(), kBuffers, sys), ConfigError);
}

TEST(Energy, IdenticalPairGivesUnitImprovement) {
  const auto& table = arraymodel::builtin_calibration();
  for (double kb : {64.0, 512.0, 8192.0}) {
    const auto c = compare_iso_capacity(toy4(), {}, table, kb, MemoryTechnology::mram_base(),
                                        MemoryTechnology::mram_base(), {});
    EXPECT_EQ(c.improvement, 1.0);
  }
  const auto c = compare_iso_area(toy4(), {}, table, 2.0, MemoryTechnology::sram(), MemoryTechnology::sram(), {});
  EXPECT_EQ(c.improvement, 1.0);
}

TEST(Energy, IsoCapacitySharesTheTrace) {
  const auto c = compare_iso_capacity(toy4(), {}, arraymodel::builtin_calibration(), 16, MemoryTechnology::sram(),
                                      MemoryTechnology::mram_base(), {});
  ASSERT_EQ(c.a.trace.records.size(), c.b.trace.records.size());
  for (std::size_t i = 0; i < c.a.trace.records.size(); ++i) {
    const auto &x = c.a.trace.records[i], &y = c.b.trace.records[i];
    EXPECT_EQ(x.layer, y.layer);
    EXPECT_EQ(x.phase, y.phase);
    EXPECT_EQ(x.macs, y.macs);
    EXPECT_EQ(x.cycles, y.cycles);
    for (Store s : dataflow::kStores) {
      EXPECT_EQ(x.at(s).reads, y.at(s).reads);
      EXPECT_EQ(x.at(s).writes, y.at(s).writes);
    }
  }
  EXPECT_EQ(c.a.report.dram_nj, c.b.report.dram_nj);
  EXPECT_EQ(c.a.report.compute_nj, c.b.report.compute_nj);
  EXPECT_DOUBLE_EQ(c.improvement, c.a.report.total_nj / c.b.report.total_nj);
}

TEST(Energy, IsoAreaMramNeverNeedsMoreDram) {
  const auto& table = arraymodel::builtin_calibration();
  for (double area : {0.5, 2.0, 10.0, 48.1, 187.0}) {
    const auto c = compare_iso_area(toy4(), {}, table, area, MemoryTechnology::sram(), MemoryTechnology::mram_base(),
                                    {});
    EXPECT_GE(c.b.buffer_kb, c.a.buffer_kb) << area;
    EXPECT_LE(c.b.report.dram_nj, c.a.report.dram_nj) << area;
  }
}

TEST(Energy, HeteroWordFactors) {
  SegmentMap map;
  map.mantissa = MemoryTechnology::mram_low_voltage();
  map.mantissa_bits_on_optimized = 23;
  const auto w = hetero_write_energy(map, 1.0);
  EXPECT_NEAR(w.word_factor, (1 + 8 + 23 * 0.40) / 32.0, 1e-12);
  EXPECT_NEAR(w.word_factor, 0.56875, 1e-12);
  EXPECT_NEAR(w.improvement, 1.0 / 0.56875, 1e-12);
  EXPECT_NEAR(w.per_word_pj, 18.2, 1e-12);
  EXPECT_EQ(map.widths(), (std::array<int, 3>{1, 8, 23}));
  map.mantissa_bits_on_optimized = 0;
  EXPECT_DOUBLE_EQ(hetero_write_energy(map, 1.0).word_factor, 1.0);
  map.mantissa_bits_on_optimized = 24;
  EXPECT_THROW(map.validate(), ConfigError);
  map.mantissa_bits_on_optimized = 4;
  EXPECT_THROW(hetero_write_energy(map, 0.0), InvalidParameter);
}

TEST(Energy, HeteroFactorBoundedAndMonotone) {
  SegmentMap map;
  map.mantissa = MemoryTechnology::mram_low_voltage();
  double prev = 1.0 + 1e-12;
  for (int bits = 0; bits <= 23; ++bits) {
    map.mantissa_bits_on_optimized = bits;
    const auto w = hetero_write_energy(map, 0.05);
    EXPECT_LT(w.word_factor, prev);
    EXPECT_GE(w.word_factor, map.mantissa.write_energy_factor);
    EXPECT_LE(w.latency_factor, 1.0);
    EXPECT_GE(w.latency_factor, map.mantissa.write_latency_factor);
    EXPECT_NEAR(w.improvement * w.word_factor, 1.0, 1e-12);
    prev = w.word_factor;
  }
}

TEST(Energy, SystemWriteEnergyThroughBaseMapMatchesReport) {
  const auto t = sample_trace();
  const auto rep = estimate_energy(t, kBuffers, SystemEnergyConfig{});
  EXPECT_NEAR(system_write_energy_nj(t, kBuffers, SegmentMap{}), rep.onchip_write_nj, 1e-12);
  SegmentMap map;
  map.mantissa = MemoryTechnology::mram_low_voltage();
  EXPECT_NEAR(system_write_energy_nj(t, kBuffers, map), rep.onchip_write_nj * 0.56875, 1e-12);
}
