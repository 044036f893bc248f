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

// Brute-force references for the dataflow counts: a register-level
// output-stationary array and explicit convolution loop nests.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "sttsim/dataflow.hpp"

namespace oracle {

struct SystolicResult {
  std::vector<double> c;
  std::uint64_t tiles = 0, a_injections = 0, b_injections = 0, writes = 0, macs = 0, cycles = 0;
  bool product_correct = true;
};

// A enters skewed from the left, B from the top; each PE multiplies the pair
// it holds and passes both on.
inline SystolicResult systolic_tile(const std::vector<double>& a, const std::vector<double>& b, std::size_t r,
                                    std::size_t k, std::size_t c) {
  SystolicResult res;
  res.c.assign(r * c, 0.0);
  struct Reg {
    double v = 0;
    bool valid = false;
  };
  std::vector<Reg> ar(r * c), br(r * c);
  std::uint64_t last_active = 0;
  for (std::uint64_t t = 0; t < k + r + c + 2; ++t) {
    std::vector<Reg> na(r * c), nb(r * c);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        if (j == 0) {
          if (t >= i && t - i < k) {
            na[i * c] = {a[i * k + (t - i)], true};
            ++res.a_injections;
          }
        } else {
          na[i * c + j] = ar[i * c + j - 1];
        }
        if (i == 0) {
          if (t >= j && t - j < k) {
            nb[j] = {b[(t - j) * c + j], true};
            ++res.b_injections;
          }
        } else {
          nb[i * c + j] = br[(i - 1) * c + j];
        }
      }
    }
    ar = na;
    br = nb;
    for (std::size_t p = 0; p < r * c; ++p) {
      if (ar[p].valid && br[p].valid) {
        res.c[p] += ar[p].v * br[p].v;
        ++res.macs;
        last_active = t;
      }
    }
  }
  // One more cycle after the last MAC to shift the results out.
  res.cycles = last_active + 2;
  res.tiles = 1;
  res.writes = r * c;
  return res;
}

// Tiles an m x k by k x n product over the array, runs every tile through the
// register model and checks the assembled product against a naive GEMM.
inline SystolicResult systolic_gemm(std::size_t m, std::size_t k, std::size_t n, std::size_t rows,
                                    std::size_t cols) {
  std::vector<double> a(m * k), b(k * n);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 1.0 + static_cast<double>(i % 7);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = 2.0 - static_cast<double>(i % 5);
  SystolicResult total;
  total.c.assign(m * n, 0.0);
  for (std::size_t i0 = 0; i0 < m; i0 += rows) {
    for (std::size_t j0 = 0; j0 < n; j0 += cols) {
      const auto r = std::min(rows, m - i0), cc = std::min(cols, n - j0);
      std::vector<double> at(r * k), bt(k * cc);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t q = 0; q < k; ++q) at[i * k + q] = a[(i0 + i) * k + q];
      for (std::size_t q = 0; q < k; ++q)
        for (std::size_t j = 0; j < cc; ++j) bt[q * cc + j] = b[q * n + j0 + j];
      const auto t = systolic_tile(at, bt, r, k, cc);
      total.tiles += t.tiles;
      total.a_injections += t.a_injections;
      total.b_injections += t.b_injections;
      total.writes += t.writes;
      total.macs += t.macs;
      total.cycles += t.cycles;
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < cc; ++j) total.c[(i0 + i) * n + j0 + j] = t.c[i * cc + j];
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double ref = 0;
      for (std::size_t q = 0; q < k; ++q) ref += a[i * k + q] * b[q * n + j];
      total.product_correct = total.product_correct && total.c[i * n + j] == ref;
    }
  }
  return total;
}

struct LoopNestShape {
  std::uint64_t rows = 0, depth = 0, cols = 0, macs = 0;
};

// Lowered GEMM of one training phase, found by walking the layer's loops:
// rows are output positions of the phase, depth the taps reduced per output,
// cols the channels produced.
inline LoopNestShape loop_nest_shape(const sttsim::dataflow::LayerSpec& spec, sttsim::dataflow::Phase phase) {
  using sttsim::dataflow::Phase;
  LoopNestShape s;
  std::uint64_t b_ = 1, i_ = 1, h = 1, w = 1, o_ = 1, k = 1, stride = 1, pad = 0;
  if (const auto* c = std::get_if<sttsim::dataflow::ConvLayer>(&spec.shape)) {
    b_ = c->batch, i_ = c->in_channels, h = c->in_height, w = c->in_width, o_ = c->out_channels, k = c->kernel;
    stride = c->stride, pad = c->padding;
  } else {
    const auto& f = std::get<sttsim::dataflow::FcLayer>(spec.shape);
    b_ = f.batch, i_ = f.in_features, o_ = f.out_features;
  }
  std::uint64_t out_positions = 0;
  for (std::uint64_t b = 0; b < b_; ++b)
    for (std::uint64_t y = 0; y + k <= h + 2 * pad; y += stride)
      for (std::uint64_t x = 0; x + k <= w + 2 * pad; x += stride) ++out_positions;
  std::uint64_t in_positions = 0;
  for (std::uint64_t b = 0; b < b_; ++b)
    for (std::uint64_t y = 0; y < h; ++y)
      for (std::uint64_t x = 0; x < w; ++x) ++in_positions;
  auto taps = [&](std::uint64_t channels) {
    std::uint64_t n = 0;
    for (std::uint64_t ky = 0; ky < k; ++ky)
      for (std::uint64_t kx = 0; kx < k; ++kx)
        for (std::uint64_t ch = 0; ch < channels; ++ch) ++n;
    return n;
  };
  switch (phase) {
    case Phase::Forward: s = {out_positions, taps(i_), o_, 0}; break;
    case Phase::BackwardInputGrad: s = {in_positions, taps(o_), i_, 0}; break;
    default: s = {o_, out_positions, taps(i_), 0}; break;
  }
  for (std::uint64_t r = 0; r < s.rows; ++r)
    for (std::uint64_t d = 0; d < s.depth; ++d)
      for (std::uint64_t c = 0; c < s.cols; ++c) ++s.macs;
  return s;
}

}  // namespace oracle
