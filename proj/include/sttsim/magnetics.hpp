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
 * @file magnetics.hpp
 * @brief Macro-spin model of STT-driven MTJ free-layer switching.
 *
 * The free layer is a single unit vector m with perpendicular uniaxial
 * anisotropy along +z. A write pulse drives a Slonczewski damping-like torque
 * toward -z; thermal agitation enters as a Gaussian effective field. Switching
 * probability is estimated by Monte Carlo, converted to write error rate and
 * extrapolated to deep error rates through a line fit of ln(WER) against the
 * drive amplitude.
 *
 * Units are CGS (Oe, emu/cc, erg) internally; the public surface uses nm, ns,
 * ps and microamperes.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sttsim/rng.hpp"

namespace sttsim::magnetics {

inline constexpr double kBoltzmann = 1.380649e-16;     // erg/K
inline constexpr double kGyromagnetic = 1.760859e7;    // rad/(s*Oe)
inline constexpr double kSwitchThreshold = -0.5;       // m_z below this counts as switched
inline constexpr double kBaselineWer = 8.62e-10;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct MtjDevice {
  double fl_thickness_nm = 1.0;
  double lateral_x_nm = 35.0;
  double lateral_y_nm = 35.0;
  double saturation_magnetization_emu_cc = 1200.0;
  double damping = 0.006;
  double temperature_k = 300.0;
  /// Temperature at which thermal_stability is quoted; fixes the energy barrier
  /// independently of the simulation temperature so T = 0 runs stay defined.
  double reference_temperature_k = 300.0;
  double thermal_stability = 55.0;
  double stt_efficiency_kbt_per_ua = 1.15;
  double gyromagnetic_ratio = kGyromagnetic;

  /// Throws InvalidParameter when an invariant is violated.
  void validate() const;

  double volume_cm3() const;
  double energy_barrier_erg() const;
  double anisotropy_field_oe() const;
  double critical_current_ua() const;
};

struct WritePulse {
  double amplitude_ua = 0.0;
  double duration_ns = 1.0;

  void validate() const;
};

struct MagSimConfig {
  double time_step_ps = 1.0;
  double relax_time_ns = 5.0;
  std::uint64_t trials = 20000;
  std::uint64_t seed = 1;
  /// Initial polar tilt used when the device temperature is 0 K. When unset
  /// the rms equilibrium tilt 1/sqrt(thermal_stability) is used.
  std::optional<double> initial_tilt_rad;
  unsigned workers = 1;

  void validate() const;
};

struct SwitchingResult {
  bool switched = false;
  std::optional<double> switch_time_ns;
};

struct WerPoint {
  double amplitude_ua = 0.0;
  double duration_ns = 0.0;
  double p_switch = 0.0;
  std::uint64_t trials = 0;
};

/// ln(WER) = slope * amplitude + intercept at one pulse duration.
struct LnWerFit {
  double slope = 0.0;       // per microampere
  double intercept = 0.0;
  double duration_ns = 0.0;
  double r_squared = 0.0;
  std::size_t points_used = 0;
};

struct WerCurve {
  std::vector<WerPoint> points;
  std::optional<LnWerFit> fit;
};

/// One Gaussian thermal-field sample per Cartesian component, in Oe.
Vec3 sample_thermal_field(const MtjDevice& device, double time_step_ps, Engine& rng);

/// Closed-form per-component standard deviation of the thermal field.
double thermal_field_sigma(const MtjDevice& device, double time_step_ps);

/// Integrates one trajectory from a state near +z over the pulse plus the
/// relaxation window. Throws NumericalFailure if |m| drifts by more than 1e-3
/// within a step.
SwitchingResult integrate_llg(const MtjDevice& device, const WritePulse& pulse,
                              const MagSimConfig& cfg, Engine& rng);

/// Fraction of cfg.trials independent trajectories that switch. Trial i draws
/// from stream (cfg.seed, i), so the result does not depend on cfg.workers.
double estimate_psw(const MtjDevice& device, const WritePulse& pulse, const MagSimConfig& cfg);

double wer_from_psw(double p_switch);

/// Least-squares line through (amplitude, ln(1 - p)) over points at the given
/// duration with 0 < p < 1. Needs at least three such points.
LnWerFit fit_ln_wer(const WerCurve& curve, double duration_ns);

double required_amplitude(const LnWerFit& fit, double target_wer);

/// Ohmic I^2 t scaling of the write energy relative to a baseline pulse.
double relative_write_energy(const WritePulse& pulse, const WritePulse& baseline);

}  // namespace sttsim::magnetics
