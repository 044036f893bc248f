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

#include "sttsim/dataflow.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <deque>
#include <fstream>
#include <ostream>
#include <sstream>

#include "sttsim/config.hpp"
#include "sttsim/error.hpp"

namespace sttsim::dataflow {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// Tensor identity within one iteration. Activations a_0..a_L, errors g_0..g_L
// (g_l is the gradient w.r.t. a_l), weights and weight gradients per layer.
enum class Kind { Activation, Weight, Error, WeightGrad };

struct Tensor {
  Kind kind;
  std::size_t layer;
  std::uint64_t elements;
  bool resident = false;
  bool placed = false;
  bool dirty = false;
  std::uint64_t seq = 0;
};

Store home_of(Kind k) {
  switch (k) {
    case Kind::Activation: return Store::Activation;
    case Kind::Weight: return Store::Weight;
    case Kind::Error:
    case Kind::WeightGrad: return Store::Error;
  }
  return Store::Dram;
}

enum class Eviction { Fifo, HighestLayerFirst };

class Residency {
 public:
  Residency(const Workload& w, const AcceleratorConfig& cfg) : element_size_(cfg.element_size) {
    const std::size_t L = w.size();
    for (std::size_t l = 0; l <= L; ++l) {
      const auto act = l == 0 ? w[0].input_elements() : w[l - 1].output_elements();
      act_.push_back(add({Kind::Activation, l, act}));
      err_.push_back(add({Kind::Error, l, act}));
    }
    for (std::size_t l = 0; l < L; ++l) {
      wt_.push_back(add({Kind::Weight, l, w[l].weight_elements()}));
      dw_.push_back(add({Kind::WeightGrad, l, w[l].weight_elements()}));
    }
    for (Store b : kBuffers) capacity_[idx(b)] = cfg.buffer_kb(b) * 1024.0;
  }

  std::size_t act(std::size_t l) const { return act_[l]; }
  std::size_t err(std::size_t l) const { return err_[l]; }
  std::size_t wt(std::size_t l) const { return wt_[l]; }
  std::size_t dw(std::size_t l) const { return dw_[l]; }

  Store where(std::size_t id) const {
    const auto& t = tensors_[id];
    return t.resident ? home_of(t.kind) : Store::Dram;
  }
  std::uint64_t elements(std::size_t id) const { return tensors_[id].elements; }
  bool placed(std::size_t id) const { return tensors_[id].placed; }
  void mark_dirty(std::size_t id) { tensors_[id].dirty = true; }

  // Atomic placement of a tensor that does not exist on chip yet. Dirty
  // victims are written back to DRAM and charged to `rec`.
  void place(std::size_t id, Eviction policy, bool produced, LayerPhaseRecord& rec) {
    auto& t = tensors_[id];
    t.placed = true;
    t.dirty = produced;
    const Store b = home_of(t.kind);
    const double bytes = static_cast<double>(t.elements * element_size_);
    if (bytes > capacity_[idx(b)]) return;
    auto& q = queue_[idx(b)];
    while (capacity_[idx(b)] - used_[idx(b)] < bytes) {
      auto victim = q.begin();
      if (policy == Eviction::HighestLayerFirst) {
        victim = std::max_element(q.begin(), q.end(), [&](std::size_t a, std::size_t c) {
          const auto& ta = tensors_[a];
          const auto& tc = tensors_[c];
          return ta.layer != tc.layer ? ta.layer < tc.layer : ta.seq > tc.seq;
        });
      }
      auto& v = tensors_[*victim];
      v.resident = false;
      used_[idx(b)] -= static_cast<double>(v.elements * element_size_);
      if (v.dirty) rec.at(Store::Dram).writes += v.elements;
      q.erase(victim);
    }
    t.resident = true;
    t.seq = next_seq_++;
    used_[idx(b)] += bytes;
    q.push_back(id);
  }

 private:
  static std::size_t idx(Store s) { return static_cast<std::size_t>(s); }
  std::size_t add(Tensor t) {
    tensors_.push_back(t);
    return tensors_.size() - 1;
  }

  std::uint64_t element_size_;
  std::vector<Tensor> tensors_;
  std::vector<std::size_t> act_, err_, wt_, dw_;
  std::array<double, 3> capacity_{};
  std::array<double, 3> used_{};
  std::array<std::deque<std::size_t>, 3> queue_;
  std::uint64_t next_seq_ = 0;
};

void check_dims(std::initializer_list<std::uint64_t> dims, const std::string& what) {
  for (auto d : dims) {
    if (d < 1) throw InvalidLayer(what + ": all dimensions must be at least 1");
  }
}

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Forward: return "FORWARD";
    case Phase::BackwardInputGrad: return "BACKWARD_INPUT_GRAD";
    case Phase::BackwardWeightGrad: return "BACKWARD_WEIGHT_GRAD";
    case Phase::WeightUpdate: return "WEIGHT_UPDATE";
  }
  return "?";
}

std::string_view to_string(Store s) {
  switch (s) {
    case Store::Activation: return "activation";
    case Store::Weight: return "weight";
    case Store::Error: return "error";
    case Store::Dram: return "dram";
  }
  return "?";
}

LayerSpec LayerSpec::conv(std::uint64_t b, std::uint64_t i, std::uint64_t m, std::uint64_t n, std::uint64_t o,
                          std::uint64_t k, std::uint64_t stride, std::uint64_t padding) {
  return {"", ConvLayer{b, i, m, n, o, k, stride, padding}};
}

LayerSpec LayerSpec::fc(std::uint64_t b, std::uint64_t in, std::uint64_t out) { return {"", FcLayer{b, in, out}}; }

void LayerSpec::validate() const {
  const std::string label = name.empty() ? "layer" : "layer '" + name + "'";
  if (const auto* c = std::get_if<ConvLayer>(&shape)) {
    check_dims({c->batch, c->in_channels, c->in_height, c->in_width, c->out_channels, c->kernel, c->stride},
               label);
    if (c->kernel > c->in_height + 2 * c->padding || c->kernel > c->in_width + 2 * c->padding) {
      throw InvalidLayer(fmt::format("{}: kernel {} exceeds padded input {}x{}", label, c->kernel,
                                     c->in_height + 2 * c->padding, c->in_width + 2 * c->padding));
    }
  } else {
    const auto& f = std::get<FcLayer>(shape);
    check_dims({f.batch, f.in_features, f.out_features}, label);
  }
}

std::uint64_t LayerSpec::input_elements() const {
  if (const auto* c = std::get_if<ConvLayer>(&shape)) return c->batch * c->in_channels * c->in_height * c->in_width;
  const auto& f = std::get<FcLayer>(shape);
  return f.batch * f.in_features;
}

std::uint64_t LayerSpec::weight_elements() const {
  if (const auto* c = std::get_if<ConvLayer>(&shape)) return c->out_channels * c->in_channels * c->kernel * c->kernel;
  const auto& f = std::get<FcLayer>(shape);
  return f.in_features * f.out_features;
}

std::uint64_t LayerSpec::output_elements() const {
  if (const auto* c = std::get_if<ConvLayer>(&shape)) {
    const auto [h, w] = out_dims(*c);
    return c->batch * c->out_channels * h * w;
  }
  const auto& f = std::get<FcLayer>(shape);
  return f.batch * f.out_features;
}

void AcceleratorConfig::validate() const {
  if (rows < 1 || cols < 1) throw ConfigError("systolic array dimensions must be at least 1");
  if (!(clock_ghz > 0)) throw ConfigError("clock must be positive");
  if (!(activation_buffer_kb > 0 && weight_buffer_kb > 0 && error_buffer_kb > 0)) {
    throw ConfigError("buffer capacities must be positive");
  }
  if (element_size != 4) throw ConfigError("element size must be 4 bytes (binary32)");
}

double AcceleratorConfig::buffer_kb(Store s) const {
  switch (s) {
    case Store::Activation: return activation_buffer_kb;
    case Store::Weight: return weight_buffer_kb;
    case Store::Error: return error_buffer_kb;
    case Store::Dram: break;
  }
  throw InvalidParameter("DRAM is not an on-chip buffer");
}

AcceleratorConfig AcceleratorConfig::with_total_capacity(double total_kb) {
  return with_buffer_capacity(total_kb / 3.0);
}

AcceleratorConfig AcceleratorConfig::with_buffer_capacity(double per_buffer_kb) {
  AcceleratorConfig c;
  c.activation_buffer_kb = c.weight_buffer_kb = c.error_buffer_kb = per_buffer_kb;
  return c;
}

bool operator==(const GemmShape& a, const GemmShape& b) {
  return a.m_rows == b.m_rows && a.k_depth == b.k_depth && a.n_cols == b.n_cols;
}

RwCount AccessTrace::count(Phase p, Store s) const {
  RwCount c;
  for (const auto& r : records) {
    if (r.phase != p) continue;
    c.reads += r.at(s).reads;
    c.writes += r.at(s).writes;
  }
  return c;
}

RwCount AccessTrace::count(Store s) const {
  RwCount c;
  for (Phase p : kPhases) {
    const auto x = count(p, s);
    c.reads += x.reads;
    c.writes += x.writes;
  }
  return c;
}

std::uint64_t AccessTrace::onchip_accesses() const {
  std::uint64_t n = 0;
  for (Store s : kBuffers) n += count(s).total();
  return n;
}

std::uint64_t AccessTrace::dram_accesses() const { return count(Store::Dram).total(); }

std::uint64_t AccessTrace::macs(Phase p) const {
  std::uint64_t n = 0;
  for (const auto& r : records) n += r.phase == p ? r.macs : 0;
  return n;
}

std::uint64_t AccessTrace::macs() const {
  std::uint64_t n = 0;
  for (const auto& r : records) n += r.macs;
  return n;
}

std::uint64_t AccessTrace::compute_cycles(Phase p) const {
  std::uint64_t n = 0;
  for (const auto& r : records) n += r.phase == p ? r.cycles : 0;
  return n;
}

std::uint64_t AccessTrace::compute_cycles() const {
  std::uint64_t n = 0;
  for (const auto& r : records) n += r.cycles;
  return n;
}

std::pair<std::uint64_t, std::uint64_t> out_dims(const ConvLayer& c) {
  LayerSpec{"", c}.validate();
  return {(c.in_height + 2 * c.padding - c.kernel) / c.stride + 1,
          (c.in_width + 2 * c.padding - c.kernel) / c.stride + 1};
}

GemmShape gemm_view(const LayerSpec& layer, Phase phase) {
  if (phase == Phase::WeightUpdate) throw NotAGemm("WEIGHT_UPDATE is element-wise, not a GEMM");
  layer.validate();
  if (const auto* c = std::get_if<ConvLayer>(&layer.shape)) {
    const auto [oh, ow] = out_dims(*c);
    const auto k2 = c->kernel * c->kernel;
    switch (phase) {
      case Phase::Forward: return {c->batch * oh * ow, k2 * c->in_channels, c->out_channels};
      case Phase::BackwardInputGrad:
        return {c->batch * c->in_height * c->in_width, k2 * c->out_channels, c->in_channels};
      default: return {c->out_channels, c->batch * oh * ow, k2 * c->in_channels};
    }
  }
  const auto& f = std::get<FcLayer>(layer.shape);
  switch (phase) {
    case Phase::Forward: return {f.batch, f.in_features, f.out_features};
    case Phase::BackwardInputGrad: return {f.batch, f.out_features, f.in_features};
    default: return {f.out_features, f.batch, f.in_features};
  }
}

PhaseCounts count_phase_accesses(const GemmShape& s, const AcceleratorConfig& cfg) {
  if (s.m_rows < 1 || s.k_depth < 1 || s.n_cols < 1) throw InvalidParameter("GEMM dimensions must be at least 1");
  if (cfg.rows < 1 || cfg.cols < 1) throw ConfigError("systolic array dimensions must be at least 1");
  PhaseCounts pc;
  const auto row_tiles = ceil_div(s.m_rows, cfg.rows);
  const auto col_tiles = ceil_div(s.n_cols, cfg.cols);
  pc.tiles = row_tiles * col_tiles;
  for (std::uint64_t i = 0; i < row_tiles; ++i) {
    const auto r = std::min(cfg.rows, s.m_rows - i * cfg.rows);
    for (std::uint64_t j = 0; j < col_tiles; ++j) {
      const auto c = std::min(cfg.cols, s.n_cols - j * cfg.cols);
      pc.a_reads += r * s.k_depth;
      pc.b_reads += c * s.k_depth;
      pc.writes += r * c;
      pc.cycles += s.k_depth + r + c - 1;
    }
  }
  pc.macs = s.m_rows * s.k_depth * s.n_cols;
  return pc;
}

AccessTrace simulate_iteration(const Workload& workload, const AcceleratorConfig& cfg) {
  if (workload.empty()) throw InvalidParameter("workload has no layers");
  cfg.validate();
  for (std::size_t l = 0; l < workload.size(); ++l) {
    workload[l].validate();
    if (l > 0 && workload[l].input_elements() != workload[l - 1].output_elements()) {
      throw InvalidLayer(fmt::format("layer {} expects {} input elements but layer {} produces {}", l,
                                     workload[l].input_elements(), l - 1, workload[l - 1].output_elements()));
    }
  }

  const std::size_t L = workload.size();
  Residency res(workload, cfg);
  AccessTrace trace;

  auto streamed = [&](std::size_t layer, Phase phase, std::size_t a_src, std::size_t b_src, std::size_t dst,
                      Eviction policy) {
    LayerPhaseRecord rec{layer, phase};
    const auto pc = count_phase_accesses(gemm_view(workload[layer], phase), cfg);
    rec.at(res.where(a_src)).reads += pc.a_reads;
    rec.at(res.where(b_src)).reads += pc.b_reads;
    res.place(dst, policy, true, rec);
    rec.at(res.where(dst)).writes += pc.writes;
    rec.macs = pc.macs;
    rec.cycles = pc.cycles;
    trace.records.push_back(rec);
  };

  // Inputs that start in DRAM: a resident copy costs one DRAM read per element.
  auto load = [&](std::size_t id, LayerPhaseRecord& rec) {
    res.place(id, Eviction::Fifo, false, rec);
    if (res.where(id) != Store::Dram) rec.at(Store::Dram).reads += res.elements(id);
  };

  for (std::size_t l = 0; l < L; ++l) {
    LayerPhaseRecord pre{l, Phase::Forward};
    if (l == 0) load(res.act(0), pre);
    load(res.wt(l), pre);
    trace.records.push_back(pre);
    streamed(l, Phase::Forward, res.act(l), res.wt(l), res.act(l + 1), Eviction::Fifo);
  }

  {
    // Loss gradient: element-wise read of the network output, write of g_L.
    LayerPhaseRecord rec{L - 1, Phase::BackwardInputGrad};
    rec.at(res.where(res.act(L))).reads += res.elements(res.act(L));
    res.place(res.err(L), Eviction::HighestLayerFirst, true, rec);
    rec.at(res.where(res.err(L))).writes += res.elements(res.err(L));
    trace.records.push_back(rec);
  }

  for (std::size_t l = L; l-- > 0;) {
    streamed(l, Phase::BackwardInputGrad, res.err(l + 1), res.wt(l), res.err(l), Eviction::HighestLayerFirst);
    streamed(l, Phase::BackwardWeightGrad, res.err(l + 1), res.act(l), res.dw(l), Eviction::HighestLayerFirst);
  }

  for (std::size_t l = 0; l < L; ++l) {
    LayerPhaseRecord rec{l, Phase::WeightUpdate};
    const auto n = res.elements(res.wt(l));
    rec.at(res.where(res.wt(l))).reads += n;
    rec.at(res.where(res.dw(l))).reads += n;
    rec.at(res.where(res.wt(l))).writes += n;
    res.mark_dirty(res.wt(l));
    trace.records.push_back(rec);
  }

  // Drop the bookkeeping-only records that carry no counts.
  std::erase_if(trace.records, [](const LayerPhaseRecord& r) {
    if (r.macs || r.cycles) return false;
    return std::all_of(r.stores.begin(), r.stores.end(), [](const RwCount& c) { return c.total() == 0; });
  });
  return trace;
}

double total_time(const AccessTrace& trace, const AcceleratorConfig& cfg,
                  const std::array<arraymodel::ArrayMetrics, 3>& onchip, double dram_latency_ns,
                  double dram_burst_elements, double onchip_access_elements) {
  if (!(dram_burst_elements > 0 && onchip_access_elements > 0)) {
    throw InvalidParameter("access widths must be positive");
  }
  double t = static_cast<double>(trace.compute_cycles()) / cfg.clock_ghz;
  for (std::size_t i = 0; i < kBuffers.size(); ++i) {
    const auto c = trace.count(kBuffers[i]);
    t += (static_cast<double>(c.reads) * onchip[i].read_latency_ns +
          static_cast<double>(c.writes) * onchip[i].write_latency_ns) /
         onchip_access_elements;
  }
  t += static_cast<double>(trace.dram_accesses()) / dram_burst_elements * dram_latency_ns;
  return t;
}

double total_time(const AccessTrace& trace, const AcceleratorConfig& cfg, const arraymodel::ArrayMetrics& onchip,
                  double dram_latency_ns, double dram_burst_elements, double onchip_access_elements) {
  return total_time(trace, cfg, {onchip, onchip, onchip}, dram_latency_ns, dram_burst_elements,
                    onchip_access_elements);
}

Workload parse_workload(const std::string& yaml_text, const std::string& source) {
  return parse_workload(config::parse_yaml(yaml_text, source), source);
}

Workload parse_workload(const YAML::Node& node, const std::string& source) {
  config::Section root(node, source);
  const auto default_batch = root.get<std::uint64_t>("batch", 0);
  root.get<std::string>("name", "");
  auto layers = root.children("layers");
  if (layers.empty()) root.fail("workload needs a non-empty 'layers' list", root.node());
  root.finish();

  Workload w;
  for (auto& s : layers) {
    LayerSpec spec;
    spec.name = s.get<std::string>("name", "");
    const auto type = s.require<std::string>("type");
    std::uint64_t batch = s.get<std::uint64_t>("batch", default_batch);
    if (batch == 0) s.fail("layer needs a batch (per layer or top-level)", s.node());
    if (type == "conv") {
      ConvLayer c;
      c.batch = batch;
      c.in_channels = s.require<std::uint64_t>("in_channels");
      c.in_height = s.require<std::uint64_t>("in_height");
      c.in_width = s.get<std::uint64_t>("in_width", c.in_height);
      c.out_channels = s.require<std::uint64_t>("out_channels");
      c.kernel = s.require<std::uint64_t>("kernel");
      c.stride = s.get<std::uint64_t>("stride", 1);
      c.padding = s.get<std::uint64_t>("padding", 0);
      spec.shape = c;
    } else if (type == "fc") {
      FcLayer f;
      f.batch = batch;
      f.in_features = s.require<std::uint64_t>("in_features");
      f.out_features = s.require<std::uint64_t>("out_features");
      spec.shape = f;
    } else {
      s.fail_key("type", "must be 'conv' or 'fc'");
    }
    s.finish();
    try {
      spec.validate();
    } catch (const InvalidLayer& e) {
      s.fail(e.what(), s.node());
    }
    if (!w.empty() && spec.input_elements() != w.back().output_elements()) {
      s.fail(fmt::format("layer expects {} input elements but the previous layer produces {}",
                         spec.input_elements(), w.back().output_elements()),
             s.node());
    }
    w.push_back(spec);
  }
  return w;
}

Workload load_workload(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open workload file", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_workload(ss.str(), path);
}

void write_trace_csv(std::ostream& out, const AccessTrace& trace, const Workload& workload) {
  out << "layer,name,phase,store,reads,writes,macs,cycles\n";
  for (const auto& r : trace.records) {
    const std::string& name = r.layer < workload.size() ? workload[r.layer].name : std::string();
    for (Store s : kStores) {
      out << fmt::format("{},{},{},{},{},{},{},{}\n", r.layer, name, to_string(r.phase), to_string(s),
                         r.at(s).reads, r.at(s).writes, r.macs, r.cycles);
    }
  }
}

}  // namespace sttsim::dataflow
