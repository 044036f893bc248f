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
 * @file dataflow.hpp
 * @brief Access counting for one training iteration on an output-stationary
 *        systolic array with three software-managed scratchpads.
 *
 * Every layer phase is viewed as a GEMM (m_rows x k_depth) * (k_depth x n_cols).
 * Outputs are tiled into rows x cols blocks; each tile streams r*k operands
 * from the A side, c*k from the B side and writes r*c results.
 *
 * Residency follows the scratchpad rules: a tensor is on chip only if all of
 * it fits in its buffer, space is made by evicting whole tensors one at a
 * time, and a tensor that is evicted or never placed is served from DRAM for
 * the rest of the iteration. Counts are in elements.
 */

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sttsim/arraymodel.hpp"

namespace YAML {
class Node;
}

namespace sttsim::dataflow {

struct ConvLayer {
  std::uint64_t batch = 1;
  std::uint64_t in_channels = 1;
  std::uint64_t in_height = 1;
  std::uint64_t in_width = 1;
  std::uint64_t out_channels = 1;
  std::uint64_t kernel = 1;
  std::uint64_t stride = 1;
  std::uint64_t padding = 0;
};

struct FcLayer {
  std::uint64_t batch = 1;
  std::uint64_t in_features = 1;
  std::uint64_t out_features = 1;
};

struct LayerSpec {
  std::string name;
  std::variant<ConvLayer, FcLayer> shape;

  static LayerSpec conv(std::uint64_t b, std::uint64_t i, std::uint64_t m, std::uint64_t n, std::uint64_t o,
                        std::uint64_t k, std::uint64_t stride = 1, std::uint64_t padding = 0);
  static LayerSpec fc(std::uint64_t b, std::uint64_t in, std::uint64_t out);

  /// Throws InvalidLayer on zero dimensions or a kernel wider than the padded input.
  void validate() const;

  std::uint64_t input_elements() const;
  std::uint64_t weight_elements() const;
  std::uint64_t output_elements() const;
};

using Workload = std::vector<LayerSpec>;

enum class Phase { Forward, BackwardInputGrad, BackwardWeightGrad, WeightUpdate };
inline constexpr std::array<Phase, 4> kPhases = {Phase::Forward, Phase::BackwardInputGrad,
                                                  Phase::BackwardWeightGrad, Phase::WeightUpdate};

enum class Store { Activation, Weight, Error, Dram };
inline constexpr std::array<Store, 4> kStores = {Store::Activation, Store::Weight, Store::Error, Store::Dram};
inline constexpr std::array<Store, 3> kBuffers = {Store::Activation, Store::Weight, Store::Error};

std::string_view to_string(Phase p);
std::string_view to_string(Store s);

struct AcceleratorConfig {
  std::uint64_t rows = 256;
  std::uint64_t cols = 256;
  double clock_ghz = 1.0;
  double activation_buffer_kb = 1024;
  double weight_buffer_kb = 1024;
  double error_buffer_kb = 1024;
  std::uint64_t element_size = 4;

  void validate() const;
  double buffer_kb(Store s) const;
  /// Equal three-way split of a total on-chip capacity.
  static AcceleratorConfig with_total_capacity(double total_kb);
  static AcceleratorConfig with_buffer_capacity(double per_buffer_kb);
};

struct GemmShape {
  std::uint64_t m_rows = 1;
  std::uint64_t k_depth = 1;
  std::uint64_t n_cols = 1;
};

bool operator==(const GemmShape& a, const GemmShape& b);

struct PhaseCounts {
  std::uint64_t tiles = 0;
  std::uint64_t a_reads = 0;
  std::uint64_t b_reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t macs = 0;
  std::uint64_t cycles = 0;
};

struct RwCount {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t total() const { return reads + writes; }
};

/// Counts attributed to one (layer, phase).
struct LayerPhaseRecord {
  std::size_t layer = 0;
  Phase phase = Phase::Forward;
  std::array<RwCount, 4> stores{};  // indexed by Store
  std::uint64_t macs = 0;
  std::uint64_t cycles = 0;
  RwCount& at(Store s) { return stores[static_cast<std::size_t>(s)]; }
  const RwCount& at(Store s) const { return stores[static_cast<std::size_t>(s)]; }
};

struct AccessTrace {
  std::vector<LayerPhaseRecord> records;

  RwCount count(Phase p, Store s) const;
  RwCount count(Store s) const;
  std::uint64_t onchip_accesses() const;
  std::uint64_t dram_accesses() const;
  std::uint64_t macs(Phase p) const;
  std::uint64_t macs() const;
  std::uint64_t compute_cycles(Phase p) const;
  std::uint64_t compute_cycles() const;
};

std::pair<std::uint64_t, std::uint64_t> out_dims(const ConvLayer& layer);

/// Throws NotAGemm for WEIGHT_UPDATE.
GemmShape gemm_view(const LayerSpec& layer, Phase phase);

PhaseCounts count_phase_accesses(const GemmShape& shape, const AcceleratorConfig& cfg);

/// Throws InvalidParameter on an empty workload, InvalidLayer on a bad layer.
AccessTrace simulate_iteration(const Workload& workload, const AcceleratorConfig& cfg);

/// Serialized execution time in ns. Element counts are grouped into DRAM
/// bursts and array words before the per-access latencies apply; with both
/// widths at 1 every counted element is one access.
double total_time(const AccessTrace& trace, const AcceleratorConfig& cfg, const arraymodel::ArrayMetrics& onchip,
                  double dram_latency_ns, double dram_burst_elements = 1.0, double onchip_access_elements = 1.0);
/// Per-buffer variant: `onchip` is indexed like kBuffers.
double total_time(const AccessTrace& trace, const AcceleratorConfig& cfg,
                  const std::array<arraymodel::ArrayMetrics, 3>& onchip, double dram_latency_ns,
                  double dram_burst_elements = 1.0, double onchip_access_elements = 1.0);

/// YAML: `layers:` list of mappings with `type: conv|fc` plus dimension keys
/// (batch, in_channels, in_height, in_width, out_channels, kernel, stride,
/// padding for conv; batch, in_features, out_features for fc). An optional
/// top-level `batch` fills in layers that omit it.
Workload parse_workload(const std::string& yaml_text, const std::string& source);
Workload parse_workload(const YAML::Node& root, const std::string& source);
Workload load_workload(const std::string& path);

/// CSV: layer,name,phase,store,reads,writes,macs,cycles
void write_trace_csv(std::ostream& out, const AccessTrace& trace, const Workload& workload);

}  // namespace sttsim::dataflow
