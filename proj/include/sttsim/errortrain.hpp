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
 * @file errortrain.hpp
 * @brief Bit-level write-error injection into binary32 tensors and an MLP
 *        trainer that passes every scratchpad write through the injector.
 *
 * Write events per minibatch: each layer output after the forward pass
 * (activation buffer), each backpropagated delta and each weight/bias
 * gradient (error buffer), and each parameter tensor after the SGD step
 * (weight buffer). Reads are clean. Any element that comes out of the
 * injector as NaN or Inf is stored as 0 and counted.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sttsim/rng.hpp"

namespace sttsim::errortrain {

inline constexpr int kMantissaBits = 23;
inline constexpr int kExponentBits = 8;

struct SegmentErrorConfig {
  double sign_wer = 0.0;
  double exponent_wer = 0.0;
  double mantissa_wer = 0.0;
  /// Only the lowest this-many mantissa bits are exposed to mantissa_wer.
  int affected_mantissa_bits = kMantissaBits;

  void validate() const;
  bool error_free() const { return sign_wer == 0 && exponent_wer == 0 && mantissa_wer == 0; }
};

struct InjectionStats {
  std::uint64_t flips = 0;
  std::uint64_t sanitized = 0;
  /// When set, every flip is appended as (element index, bit position 0..31).
  std::vector<std::pair<std::uint64_t, int>>* flip_log = nullptr;
};

std::uint32_t float_bits(float v);
float bits_float(std::uint32_t b);

/// Flips bits of every element independently with its segment's rate, then
/// zeroes non-finite results. Bit positions of one segment are visited across
/// the whole tensor by geometric skipping, so the cost scales with the number
/// of flips rather than the number of bits.
void inject_tensor(std::span<float> values, const SegmentErrorConfig& cfg, Engine& rng,
                   InjectionStats* stats = nullptr);
float inject_word(float value, const SegmentErrorConfig& cfg, Engine& rng, InjectionStats* stats = nullptr);

struct BufferErrorBinding {
  SegmentErrorConfig activations;
  SegmentErrorConfig weights;
  SegmentErrorConfig errors;

  void validate() const;
  bool error_free() const { return activations.error_free() && weights.error_free() && errors.error_free(); }
};

enum class Activation { Tanh, Relu, Identity };
enum class Loss { CrossEntropy, Quadratic };

Activation activation_from_string(const std::string& name);
std::string activation_name(Activation a);

struct TinyNetSpec {
  std::vector<std::size_t> layer_sizes = {64, 96, 48, 10};
  Activation activation = Activation::Tanh;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t parameter_count() const;
};

struct Dataset {
  std::size_t features = 0;
  std::size_t classes = 0;
  std::vector<float> train_x, test_x;  // row-major
  std::vector<int> train_y, test_y;

  std::size_t train_size() const { return train_y.size(); }
  std::size_t test_size() const { return test_y.size(); }
  void validate() const;
};

/// CSV with header `split,label,<features...>`; split is train or test.
/// Lines starting with '#' are comments.
Dataset load_dataset_csv(const std::string& path);
Dataset parse_dataset_csv(std::istream& in, const std::string& source);
/// Two interleaving half circles with Gaussian jitter, 2 features, 2 classes.
Dataset make_two_moons(std::size_t train_n, std::size_t test_n, double noise, std::uint64_t seed);
void write_dataset_csv(std::ostream& out, const Dataset& d);

struct EpochResult {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  std::uint64_t nan_sanitized = 0;
  std::uint64_t bit_flips = 0;
};

struct TrainResult {
  std::vector<EpochResult> epochs;
  bool diverged = false;

  double final_accuracy() const { return epochs.empty() ? 0.0 : epochs.back().test_accuracy; }
};

/// Minibatch SGD with softmax cross-entropy. Training always runs all epochs;
/// `diverged` is set once any minibatch loss is non-finite.
TrainResult train_with_errors(const TinyNetSpec& net, const Dataset& data, const BufferErrorBinding& binding);
/// The same trainer with the injector removed from every write path.
TrainResult train_reference(const TinyNetSpec& net, const Dataset& data);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t parameters = 0;
  /// Analytic gradient, flattened layer by layer as (W row-major, b).
  std::vector<double> analytic;
};

/// Central differences with step `step` in double precision over every
/// parameter of a freshly initialised `net` on the given samples. Relative
/// error is |a - n| / max(|a|, |n|, floor).
GradientCheckResult gradient_check(const TinyNetSpec& net, std::span<const double> x, std::span<const int> labels,
                                   Loss loss = Loss::CrossEntropy, double step = 1e-4, double floor = 1e-6,
                                   std::optional<std::vector<double>> parameters = std::nullopt,
                                   std::span<const double> quadratic_targets = {});

}  // namespace sttsim::errortrain
