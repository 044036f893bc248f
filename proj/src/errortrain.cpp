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

#include "sttsim/errortrain.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "sttsim/error.hpp"

namespace sttsim::errortrain {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("{} must lie in [0, 1], got {}", what, p));
}

// Visits the positions of a Bernoulli(p) process over [0, n) without touching
// the gaps: successive gaps are geometric.
template <class F>
void for_each_hit(std::uint64_t n, double p, Engine& rng, F&& hit) {
  if (p <= 0.0 || n == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < n; ++i) hit(i);
    return;
  }
  const double log_q = std::log1p(-p);
  std::uint64_t pos = 0;
  for (;;) {
    const double u = 1.0 - uniform01(rng);  // (0, 1]
    const double gap = std::floor(std::log(u) / log_q);
    if (gap >= static_cast<double>(n - pos)) return;
    pos += static_cast<std::uint64_t>(gap);
    hit(pos);
    if (++pos >= n) return;
  }
}

double gaussian(Engine& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t sanitize(std::span<float> v) {
  std::uint64_t n = 0;
  for (float& x : v) {
    if (!std::isfinite(x)) {
      x = 0.0f;
      ++n;
    }
  }
  return n;
}

// Tensor tags in the injection stream path.
enum Tag : std::uint64_t { kInit = 1, kShuffle = 2, kInject = 3 };
enum TensorKind : std::uint64_t { kAct = 0, kDelta = 1, kGradW = 2, kGradB = 3, kWeight = 4, kBias = 5 };

template <class T>
struct Mlp {
  std::vector<std::size_t> sizes;
  Activation act = Activation::Tanh;
  std::vector<std::vector<T>> w;  // w[l] is sizes[l] x sizes[l+1], row-major
  std::vector<std::vector<T>> b;

  std::size_t layers() const { return sizes.size() - 1; }

  static Mlp init(const TinyNetSpec& spec) {
    Mlp m;
    m.sizes = spec.layer_sizes;
    m.act = spec.activation;
    Engine rng = make_stream(spec.seed, {kInit});
    for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
      const double a = std::sqrt(6.0 / static_cast<double>(m.sizes[l] + m.sizes[l + 1]));
      std::vector<T> wl(m.sizes[l] * m.sizes[l + 1]);
      for (auto& x : wl) x = static_cast<T>(a * (2.0 * uniform01(rng) - 1.0));
      m.w.push_back(std::move(wl));
      m.b.emplace_back(m.sizes[l + 1], T(0));
    }
    return m;
  }

  T apply(T z) const {
    switch (act) {
      case Activation::Tanh: return std::tanh(z);
      case Activation::Relu: return z > T(0) ? z : T(0);
      case Activation::Identity: return z;
    }
    return z;
  }

  // Derivative expressed through the stored activation value.
  T derivative_from_output(T a) const {
    switch (act) {
      case Activation::Tanh: return T(1) - a * a;
      case Activation::Relu: return a > T(0) ? T(1) : T(0);
      case Activation::Identity: return T(1);
    }
    return T(1);
  }

  // out = in * w[l] + b[l], activation applied unless l is the last layer.
  void layer_forward(std::size_t l, const std::vector<T>& in, std::size_t n, std::vector<T>& out) const {
    const std::size_t fi = sizes[l], fo = sizes[l + 1];
    out.assign(n * fo, T(0));
    for (std::size_t s = 0; s < n; ++s) {
      T* o = &out[s * fo];
      for (std::size_t j = 0; j < fo; ++j) o[j] = b[l][j];
      for (std::size_t i = 0; i < fi; ++i) {
        const T x = in[s * fi + i];
        if (x == T(0)) continue;
        const T* wr = &w[l][i * fo];
        for (std::size_t j = 0; j < fo; ++j) o[j] += x * wr[j];
      }
      if (l + 1 < layers()) {
        for (std::size_t j = 0; j < fo; ++j) o[j] = apply(o[j]);
      }
    }
  }
};

// Loss over a batch of logits and its gradient with respect to them.
template <class T>
T loss_and_delta(Loss loss, const std::vector<T>& logits, std::size_t n, std::size_t classes,
                 std::span<const int> labels, std::span<const T> targets, std::vector<T>& delta) {
  delta.assign(n * classes, T(0));
  T total = T(0);
  const T inv_n = T(1) / static_cast<T>(n);
  for (std::size_t s = 0; s < n; ++s) {
    const T* z = &logits[s * classes];
    T* d = &delta[s * classes];
    if (loss == Loss::Quadratic) {
      for (std::size_t j = 0; j < classes; ++j) {
        const T e = z[j] - targets[s * classes + j];
        total += T(0.5) * e * e;
        d[j] = e * inv_n;
      }
      continue;
    }
    const T zmax = *std::max_element(z, z + classes);
    T sum = T(0);
    for (std::size_t j = 0; j < classes; ++j) sum += std::exp(z[j] - zmax);
    const T log_sum = std::log(sum) + zmax;
    total += log_sum - z[labels[s]];
    for (std::size_t j = 0; j < classes; ++j) d[j] = std::exp(z[j] - log_sum) * inv_n;
    d[labels[s]] -= inv_n;
  }
  return total * inv_n;
}

// Hook invoked on every scratchpad write; a no-op for the clean trainer.
struct Writer {
  const BufferErrorBinding* binding = nullptr;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::uint64_t batch = 0;
  std::uint64_t sanitized = 0;
  std::uint64_t flips = 0;

  void write(std::vector<float>& v, const SegmentErrorConfig& cfg, TensorKind kind, std::size_t layer) {
    if (!binding) return;
    InjectionStats st;
    if (cfg.error_free()) {
      st.sanitized = sanitize(v);
    } else {
      Engine rng = make_stream(seed, {kInject, epoch, batch, kind, layer});
      inject_tensor(v, cfg, rng, &st);
    }
    sanitized += st.sanitized;
    flips += st.flips;
  }
};

double accuracy(const Mlp<float>& m, const std::vector<float>& x, const std::vector<int>& y) {
  const std::size_t n = y.size();
  std::vector<float> cur(x), next;
  for (std::size_t l = 0; l < m.layers(); ++l) {
    m.layer_forward(l, cur, n, next);
    cur.swap(next);
  }
  const std::size_t c = m.sizes.back();
  std::size_t correct = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const float* z = &cur[s * c];
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j) {
      if (z[j] > z[best]) best = j;
    }
    correct += static_cast<int>(best) == y[s];
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

TrainResult train_impl(const TinyNetSpec& net, const Dataset& data, const BufferErrorBinding* binding) {
  net.validate();
  data.validate();
  if (net.layer_sizes.front() != data.features || net.layer_sizes.back() != data.classes) {
    throw ConfigError(fmt::format("network shape {}..{} does not match dataset ({} features, {} classes)",
                                  net.layer_sizes.front(), net.layer_sizes.back(), data.features, data.classes));
  }
  if (binding) binding->validate();

  Mlp<float> m = Mlp<float>::init(net);
  const std::size_t L = m.layers();
  const std::size_t nf = data.features;
  const float lr = static_cast<float>(net.learning_rate);

  TrainResult result;
  std::vector<std::size_t> order(data.train_size());
  std::vector<std::vector<float>> acts(L + 1);
  std::vector<float> delta, prev, gw, gb;
  Writer writer{binding, net.seed};

  for (std::size_t epoch = 0; epoch < net.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Engine shuffle_rng = make_stream(net.seed, {kShuffle, epoch});
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(shuffle_rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[j]);
    }

    writer.epoch = epoch;
    writer.sanitized = writer.flips = 0;
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += net.batch_size, ++batches) {
      writer.batch = batches;
      const std::size_t n = std::min(net.batch_size, order.size() - start);
      std::vector<int> labels(n);
      acts[0].resize(n * nf);
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t row = order[start + s];
        std::copy_n(&data.train_x[row * nf], nf, &acts[0][s * nf]);
        labels[s] = data.train_y[row];
      }

      for (std::size_t l = 0; l < L; ++l) {
        m.layer_forward(l, acts[l], n, acts[l + 1]);
        writer.write(acts[l + 1], binding ? binding->activations : SegmentErrorConfig{}, kAct, l + 1);
      }

      const float loss =
          loss_and_delta<float>(Loss::CrossEntropy, acts[L], n, data.classes, labels, {}, delta);
      if (!std::isfinite(loss)) result.diverged = true;
      loss_sum += loss;
      const SegmentErrorConfig& err_cfg = binding ? binding->errors : SegmentErrorConfig{};
      writer.write(delta, err_cfg, kDelta, L - 1);

      for (std::size_t l = L; l-- > 0;) {
        const std::size_t fi = m.sizes[l], fo = m.sizes[l + 1];
        gw.assign(fi * fo, 0.0f);
        gb.assign(fo, 0.0f);
        for (std::size_t s = 0; s < n; ++s) {
          const float* d = &delta[s * fo];
          const float* a = &acts[l][s * fi];
          for (std::size_t j = 0; j < fo; ++j) gb[j] += d[j];
          for (std::size_t i = 0; i < fi; ++i) {
            const float ai = a[i];
            if (ai == 0.0f) continue;
            float* g = &gw[i * fo];
            for (std::size_t j = 0; j < fo; ++j) g[j] += ai * d[j];
          }
        }
        writer.write(gw, err_cfg, kGradW, l);
        writer.write(gb, err_cfg, kGradB, l);

        if (l > 0) {
          prev.assign(n * fi, 0.0f);
          for (std::size_t s = 0; s < n; ++s) {
            const float* d = &delta[s * fo];
            for (std::size_t i = 0; i < fi; ++i) {
              const float* wr = &m.w[l][i * fo];
              float sum = 0.0f;
              for (std::size_t j = 0; j < fo; ++j) sum += wr[j] * d[j];
              prev[s * fi + i] = sum * m.derivative_from_output(acts[l][s * fi + i]);
            }
          }
          writer.write(prev, err_cfg, kDelta, l - 1);
          delta.swap(prev);
        }

        for (std::size_t k = 0; k < gw.size(); ++k) m.w[l][k] -= lr * gw[k];
        for (std::size_t k = 0; k < gb.size(); ++k) m.b[l][k] -= lr * gb[k];
        const SegmentErrorConfig& w_cfg = binding ? binding->weights : SegmentErrorConfig{};
        writer.write(m.w[l], w_cfg, kWeight, l);
        writer.write(m.b[l], w_cfg, kBias, l);
      }
    }

    EpochResult e;
    e.epoch = epoch + 1;
    e.train_loss = loss_sum / static_cast<double>(batches);
    e.test_accuracy = accuracy(m, data.test_x, data.test_y);
    e.nan_sanitized = writer.sanitized;
    e.bit_flips = writer.flips;
    result.epochs.push_back(e);
  }
  return result;
}

template <class T>
T batch_loss(const Mlp<T>& m, std::span<const T> x, std::size_t n, std::span<const int> labels, Loss loss,
             std::span<const T> targets) {
  std::vector<T> cur(x.begin(), x.end()), next, delta;
  for (std::size_t l = 0; l < m.layers(); ++l) {
    m.layer_forward(l, cur, n, next);
    cur.swap(next);
  }
  return loss_and_delta<T>(loss, cur, n, m.sizes.back(), labels, targets, delta);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

void SegmentErrorConfig::validate() const {
  check_probability(sign_wer, "sign WER");
  check_probability(exponent_wer, "exponent WER");
  check_probability(mantissa_wer, "mantissa WER");
  if (affected_mantissa_bits < 0 || affected_mantissa_bits > kMantissaBits) {
    throw ConfigError(fmt::format("affected mantissa bits must lie in [0, 23], got {}", affected_mantissa_bits));
  }
}

void BufferErrorBinding::validate() const {
  activations.validate();
  weights.validate();
  errors.validate();
}

std::uint32_t float_bits(float v) { return std::bit_cast<std::uint32_t>(v); }
float bits_float(std::uint32_t b) { return std::bit_cast<float>(b); }

void inject_tensor(std::span<float> values, const SegmentErrorConfig& cfg, Engine& rng, InjectionStats* stats) {
  cfg.validate();
  struct Segment {
    double p;
    int low;
    int width;
  };
  const Segment segments[] = {{cfg.sign_wer, 31, 1},
                              {cfg.exponent_wer, kMantissaBits, kExponentBits},
                              {cfg.mantissa_wer, 0, cfg.affected_mantissa_bits}};
  std::uint64_t flips = 0;
  for (const auto& seg : segments) {
    if (seg.width == 0) continue;
    const auto w = static_cast<std::uint64_t>(seg.width);
    for_each_hit(values.size() * w, seg.p, rng, [&](std::uint64_t pos) {
      const std::uint64_t elem = pos / w;
      const int bit = seg.low + static_cast<int>(pos % w);
      values[elem] = bits_float(float_bits(values[elem]) ^ (std::uint32_t{1} << bit));
      ++flips;
      if (stats && stats->flip_log) stats->flip_log->emplace_back(elem, bit);
    });
  }
  const auto sanitized = sanitize(values);
  if (stats) {
    stats->flips += flips;
    stats->sanitized += sanitized;
  }
}

float inject_word(float value, const SegmentErrorConfig& cfg, Engine& rng, InjectionStats* stats) {
  inject_tensor(std::span<float>(&value, 1), cfg, rng, stats);
  return value;
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + name + "' (expected tanh, relu or identity)");
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "?";
}

void TinyNetSpec::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("network needs at least an input and an output layer");
  for (auto s : layer_sizes) {
    if (s < 1) throw ConfigError("layer sizes must be at least 1");
  }
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
}

std::size_t TinyNetSpec::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
  return n;
}

void Dataset::validate() const {
  if (features < 1 || classes < 2) throw ConfigError("dataset needs at least 1 feature and 2 classes");
  if (train_y.empty() || test_y.empty()) throw ConfigError("dataset needs non-empty train and test splits");
  if (train_x.size() != train_y.size() * features || test_x.size() != test_y.size() * features) {
    throw ConfigError("dataset feature matrix does not match its label count");
  }
  auto bad = [&](int y) { return y < 0 || y >= static_cast<int>(classes); };
  if (std::any_of(train_y.begin(), train_y.end(), bad) || std::any_of(test_y.begin(), test_y.end(), bad)) {
    throw ConfigError("dataset label out of range");
  }
}

Dataset parse_dataset_csv(std::istream& in, const std::string& source) {
  Dataset d;
  std::string raw;
  int line_no = 0;
  bool header = false;
  int max_label = -1;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> cells;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!header) {
      if (cells.size() < 3 || cells[0] != "split" || cells[1] != "label") {
        throw ConfigError("expected header 'split,label,<features...>'", source, line_no);
      }
      d.features = cells.size() - 2;
      header = true;
      continue;
    }
    if (cells.size() != d.features + 2) {
      throw ConfigError(fmt::format("expected {} fields, got {}", d.features + 2, cells.size()), source, line_no);
    }
    const bool train = cells[0] == "train";
    if (!train && cells[0] != "test") throw ConfigError("split must be train or test", source, line_no);
    int label = 0;
    auto [lp, lec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), label);
    if (lec != std::errc() || lp != cells[1].data() + cells[1].size() || label < 0) {
      throw ConfigError(fmt::format("bad label '{}'", cells[1]), source, line_no);
    }
    max_label = std::max(max_label, label);
    auto& xs = train ? d.train_x : d.test_x;
    for (std::size_t i = 2; i < cells.size(); ++i) {
      float v = 0.0f;
      auto [p, ec] = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v);
      if (ec != std::errc() || p != cells[i].data() + cells[i].size() || !std::isfinite(v)) {
        throw ConfigError(fmt::format("field {} is not a number: '{}'", i + 1, cells[i]), source, line_no);
      }
      xs.push_back(v);
    }
    (train ? d.train_y : d.test_y).push_back(label);
  }
  if (!header) throw ConfigError("dataset file is empty", source);
  d.classes = static_cast<std::size_t>(max_label + 1);
  try {
    d.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), source);
  }
  return d;
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file", path);
  return parse_dataset_csv(in, path);
}

Dataset make_two_moons(std::size_t train_n, std::size_t test_n, double noise, std::uint64_t seed) {
  Dataset d;
  d.features = 2;
  d.classes = 2;
  Engine rng = make_stream(seed, {0x6d6f6f6e});
  auto fill = [&](std::size_t n, std::vector<float>& x, std::vector<int>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      const int label = static_cast<int>(i % 2);
      const double t = std::numbers::pi * uniform01(rng);
      double px = label == 0 ? std::cos(t) : 1.0 - std::cos(t);
      double py = label == 0 ? std::sin(t) : 0.5 - std::sin(t);
      px += noise * gaussian(rng);
      py += noise * gaussian(rng);
      x.push_back(static_cast<float>(px));
      x.push_back(static_cast<float>(py));
      y.push_back(label);
    }
  };
  fill(train_n, d.train_x, d.train_y);
  fill(test_n, d.test_x, d.test_y);
  return d;
}

void write_dataset_csv(std::ostream& out, const Dataset& d) {
  out << "split,label";
  for (std::size_t i = 0; i < d.features; ++i) out << ",x" << i;
  out << '\n';
  auto rows = [&](const char* split, const std::vector<float>& x, const std::vector<int>& y) {
    for (std::size_t s = 0; s < y.size(); ++s) {
      out << split << ',' << y[s];
      for (std::size_t i = 0; i < d.features; ++i) out << ',' << fmt::format("{}", x[s * d.features + i]);
      out << '\n';
    }
  };
  rows("train", d.train_x, d.train_y);
  rows("test", d.test_x, d.test_y);
}

TrainResult train_with_errors(const TinyNetSpec& net, const Dataset& data, const BufferErrorBinding& binding) {
  return train_impl(net, data, &binding);
}

TrainResult train_reference(const TinyNetSpec& net, const Dataset& data) { return train_impl(net, data, nullptr); }

GradientCheckResult gradient_check(const TinyNetSpec& net, std::span<const double> x, std::span<const int> labels,
                                   Loss loss, double step, double floor,
                                   std::optional<std::vector<double>> parameters,
                                   std::span<const double> quadratic_targets) {
  net.validate();
  const std::size_t nf = net.layer_sizes.front();
  const std::size_t nc = net.layer_sizes.back();
  if (x.empty() || x.size() % nf != 0) throw InvalidParameter("sample matrix does not match the input width");
  const std::size_t n = x.size() / nf;
  if (loss == Loss::CrossEntropy && labels.size() != n) throw InvalidParameter("one label per sample required");
  if (loss == Loss::Quadratic && quadratic_targets.size() != n * nc) {
    throw InvalidParameter("quadratic loss needs one target row per sample");
  }
  if (!(step > 0)) throw InvalidParameter("finite-difference step must be positive");

  Mlp<double> m = Mlp<double>::init(net);
  std::vector<double*> params;
  for (std::size_t l = 0; l < m.layers(); ++l) {
    for (auto& v : m.w[l]) params.push_back(&v);
    for (auto& v : m.b[l]) params.push_back(&v);
  }
  if (parameters) {
    if (parameters->size() != params.size()) throw InvalidParameter("parameter vector has the wrong length");
    for (std::size_t i = 0; i < params.size(); ++i) *params[i] = (*parameters)[i];
  }

  // Analytic gradient by the same backward recurrences the trainer uses.
  const std::size_t L = m.layers();
  std::vector<std::vector<double>> acts(L + 1);
  acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < L; ++l) m.layer_forward(l, acts[l], n, acts[l + 1]);
  std::vector<double> delta, prev;
  loss_and_delta<double>(loss, acts[L], n, nc, labels, quadratic_targets, delta);
  std::vector<std::vector<double>> gw(L), gb(L);
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t fi = m.sizes[l], fo = m.sizes[l + 1];
    gw[l].assign(fi * fo, 0.0);
    gb[l].assign(fo, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t j = 0; j < fo; ++j) gb[l][j] += delta[s * fo + j];
      for (std::size_t i = 0; i < fi; ++i) {
        for (std::size_t j = 0; j < fo; ++j) gw[l][i * fo + j] += acts[l][s * fi + i] * delta[s * fo + j];
      }
    }
    if (l > 0) {
      prev.assign(n * fi, 0.0);
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t i = 0; i < fi; ++i) {
          double sum = 0.0;
          for (std::size_t j = 0; j < fo; ++j) sum += m.w[l][i * fo + j] * delta[s * fo + j];
          prev[s * fi + i] = sum * m.derivative_from_output(acts[l][s * fi + i]);
        }
      }
      delta.swap(prev);
    }
  }

  GradientCheckResult r;
  r.parameters = params.size();
  for (std::size_t l = 0; l < L; ++l) {
    r.analytic.insert(r.analytic.end(), gw[l].begin(), gw[l].end());
    r.analytic.insert(r.analytic.end(), gb[l].begin(), gb[l].end());
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + step;
    const double up = batch_loss<double>(m, x, n, labels, loss, quadratic_targets);
    *params[i] = saved - step;
    const double down = batch_loss<double>(m, x, n, labels, loss, quadratic_targets);
    *params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = r.analytic[i];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
    r.max_relative_error = std::max(r.max_relative_error, rel);
  }
  return r;
}

}  // namespace sttsim::errortrain
