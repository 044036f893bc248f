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

#include "sttsim/magnetics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "sttsim/error.hpp"

namespace sttsim::magnetics {

namespace {

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

// Precomputed per-run constants of the LLG right-hand side.
struct Drive {
  double gamma_ll;   // gamma / (1 + alpha^2), rad/(s*Oe)
  double alpha;
  double hk;         // anisotropy field, Oe
  double a_j;        // damping-like STT field toward -z, Oe
};

// dm/dt = -gamma' [ m x (H - alpha a_J p) + m x (m x (alpha H + a_J p)) ], p = -z,
// the Landau-Lifshitz form of the Gilbert equation with a Slonczewski term.
inline Vec3 drift(const Vec3& m, const Vec3& h_thermal, const Drive& d, double a_j) {
  const Vec3 h{h_thermal.x, h_thermal.y, d.hk * m.z + h_thermal.z};
  const Vec3 h_prec{h.x, h.y, h.z + d.alpha * a_j};
  const Vec3 h_damp{d.alpha * h.x, d.alpha * h.y, d.alpha * h.z - a_j};
  const Vec3 t = cross(m, h_prec) + cross(m, cross(m, h_damp));
  return (-d.gamma_ll) * t;
}

// Polar angle from the Boltzmann distribution exp(-delta sin^2 theta) on the
// upper hemisphere, by rejection from exp(-delta (1 - cos theta)).
double sample_equilibrium_cos(double delta, Engine& rng) {
  const double norm_const = -std::expm1(-delta);
  for (;;) {
    const double u = uniform01(rng);
    const double w = -std::log1p(-u * norm_const) / delta;  // 1 - cos theta in [0, 1]
    const double x = 1.0 - w;
    if (uniform01(rng) < std::exp(-delta * w * x)) return x;
  }
}

}  // namespace

void MtjDevice::validate() const {
  require(fl_thickness_nm > 0 && lateral_x_nm > 0 && lateral_y_nm > 0,
          "free-layer geometry must be strictly positive");
  require(saturation_magnetization_emu_cc > 0, "saturation magnetization must be positive");
  require(damping > 0, "Gilbert damping must be positive");
  require(temperature_k >= 0, "temperature must be non-negative");
  require(reference_temperature_k > 0, "reference temperature must be positive");
  require(thermal_stability >= 20 && thermal_stability <= 100,
          "thermal stability must lie in [20, 100]");
  require(stt_efficiency_kbt_per_ua > 0, "STT efficiency must be positive");
  require(gyromagnetic_ratio > 0, "gyromagnetic ratio must be positive");
}

double MtjDevice::volume_cm3() const {
  return fl_thickness_nm * lateral_x_nm * lateral_y_nm * 1e-21;
}

double MtjDevice::energy_barrier_erg() const {
  return thermal_stability * kBoltzmann * reference_temperature_k;
}

// E_B = M_s H_k V / 2 for a uniaxial macro-spin.
double MtjDevice::anisotropy_field_oe() const {
  return 2.0 * energy_barrier_erg() / (saturation_magnetization_emu_cc * volume_cm3());
}

double MtjDevice::critical_current_ua() const {
  return thermal_stability / stt_efficiency_kbt_per_ua;
}

void WritePulse::validate() const {
  require(amplitude_ua >= 0, "pulse amplitude must be non-negative");
  require(duration_ns > 0, "pulse duration must be positive");
}

void MagSimConfig::validate() const {
  require(time_step_ps > 0 && time_step_ps <= 10, "time step must lie in (0, 10] ps");
  require(relax_time_ns >= 0, "relaxation time must be non-negative");
  require(trials >= 1, "at least one trial is required");
  if (initial_tilt_rad) {
    require(*initial_tilt_rad > 0 && *initial_tilt_rad < std::numbers::pi / 2,
            "initial tilt must lie in (0, pi/2)");
  }
}

double thermal_field_sigma(const MtjDevice& device, double time_step_ps) {
  if (!(time_step_ps > 0)) throw InvalidParameter("time step must be positive");
  const double volume = device.volume_cm3();
  if (!(volume > 0)) throw InvalidParameter("free-layer volume must be positive");
  const double dt = time_step_ps * 1e-12;
  return std::sqrt(2.0 * device.damping * kBoltzmann * device.temperature_k /
                   (device.gyromagnetic_ratio * device.saturation_magnetization_emu_cc * volume * dt));
}

Vec3 sample_thermal_field(const MtjDevice& device, double time_step_ps, Engine& rng) {
  const double sigma = thermal_field_sigma(device, time_step_ps);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double x = gauss(rng);
  const double y = gauss(rng);
  const double z = gauss(rng);
  return {sigma * x, sigma * y, sigma * z};
}

SwitchingResult integrate_llg(const MtjDevice& device, const WritePulse& pulse,
                              const MagSimConfig& cfg, Engine& rng) {
  device.validate();
  pulse.validate();
  cfg.validate();

  const double alpha = device.damping;
  Drive d{device.gyromagnetic_ratio / (1.0 + alpha * alpha), alpha, device.anisotropy_field_oe(), 0.0};
  // Calibrated so the zero-temperature long-pulse threshold sits at I_c0.
  const double a_j_on = alpha * d.hk * pulse.amplitude_ua / device.critical_current_ua();

  const double dt = cfg.time_step_ps * 1e-12;
  const double sigma = thermal_field_sigma(device, cfg.time_step_ps);
  const bool thermal = sigma > 0.0;
  const auto pulse_steps = static_cast<std::int64_t>(std::llround(pulse.duration_ns * 1e3 / cfg.time_step_ps));
  const auto total_steps =
      pulse_steps + static_cast<std::int64_t>(std::llround(cfg.relax_time_ns * 1e3 / cfg.time_step_ps));

  std::normal_distribution<double> gauss(0.0, 1.0);

  double cos_theta;
  if (thermal) {
    const double delta_t = device.energy_barrier_erg() / (kBoltzmann * device.temperature_k);
    cos_theta = sample_equilibrium_cos(delta_t, rng);
  } else {
    cos_theta = std::cos(cfg.initial_tilt_rad.value_or(1.0 / std::sqrt(device.thermal_stability)));
  }
  const double phi = 2.0 * std::numbers::pi * uniform01(rng);
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  Vec3 m{sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta};

  Vec3 h_th{};
  for (std::int64_t step = 0; step < total_steps; ++step) {
    const double a_j = step < pulse_steps ? a_j_on : 0.0;
    if (thermal) {
      h_th.x = sigma * gauss(rng);
      h_th.y = sigma * gauss(rng);
      h_th.z = sigma * gauss(rng);
    }
    // Stochastic Heun: the same noise realization in predictor and corrector.
    const Vec3 f0 = drift(m, h_th, d, a_j);
    const Vec3 pred = m + dt * f0;
    const Vec3 f1 = drift(pred, h_th, d, a_j);
    const Vec3 next = m + (0.5 * dt) * (f0 + f1);
    const double n = norm(next);
    if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-3) {
      throw NumericalFailure("LLG integration blew up at step " + std::to_string(step) +
                             " (|m| = " + std::to_string(n) + ")");
    }
    m = (1.0 / n) * next;
    if (m.z < kSwitchThreshold) {
      return {true, static_cast<double>(step + 1) * cfg.time_step_ps * 1e-3};
    }
  }
  return {false, std::nullopt};
}

double estimate_psw(const MtjDevice& device, const WritePulse& pulse, const MagSimConfig& cfg) {
  device.validate();
  pulse.validate();
  cfg.validate();

  const std::uint64_t trials = cfg.trials;
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> switched{0};
  std::mutex failure_mutex;
  std::uint64_t failure_index = std::numeric_limits<std::uint64_t>::max();
  std::exception_ptr failure;

  auto worker = [&] {
    std::uint64_t local = 0;
    for (std::uint64_t i = next++; i < trials; i = next++) {
      Engine rng = make_stream(cfg.seed, {i});
      try {
        if (integrate_llg(device, pulse, cfg, rng).switched) ++local;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failure_index) {
          failure_index = i;
          failure = std::current_exception();
        }
      }
    }
    switched += local;
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(trials)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return static_cast<double>(switched.load()) / static_cast<double>(trials);
}

double wer_from_psw(double p_switch) {
  if (!(p_switch >= 0.0 && p_switch <= 1.0)) {
    throw InvalidParameter("switching probability must lie in [0, 1]");
  }
  return 1.0 - p_switch;
}

LnWerFit fit_ln_wer(const WerCurve& curve, double duration_ns) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : curve.points) {
    if (std::abs(p.duration_ns - duration_ns) > 1e-9 * std::max(1.0, duration_ns)) continue;
    if (p.p_switch > 0.0 && p.p_switch < 1.0) xy.emplace_back(p.amplitude_ua, std::log(1.0 - p.p_switch));
  }
  if (xy.size() < 3) {
    throw InsufficientData("ln(WER) fit at " + std::to_string(duration_ns) + " ns needs at least 3 points with 0 < p_switch < 1, got " +
                           std::to_string(xy.size()));
  }
  const double n = static_cast<double>(xy.size());
  double mx = 0, my = 0;
  for (auto [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0)) throw InsufficientData("ln(WER) fit needs at least two distinct amplitudes");
  LnWerFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.duration_ns = duration_ns;
  fit.points_used = xy.size();
  double ss_res = 0;
  for (auto [x, y] : xy) {
    const double r = y - (fit.slope * x + fit.intercept);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

double required_amplitude(const LnWerFit& fit, double target_wer) {
  if (!(fit.slope < 0.0)) throw InvalidFit("ln(WER) fit slope must be negative");
  if (!(target_wer > 0.0 && target_wer < 1.0)) throw InvalidParameter("target WER must lie in (0, 1)");
  return (std::log(target_wer) - fit.intercept) / fit.slope;
}

double relative_write_energy(const WritePulse& pulse, const WritePulse& baseline) {
  if (!(baseline.amplitude_ua > 0.0)) throw InvalidParameter("baseline amplitude must be positive");
  if (!(baseline.duration_ns > 0.0)) throw InvalidParameter("baseline duration must be positive");
  const double ratio = pulse.amplitude_ua / baseline.amplitude_ua;
  return ratio * ratio * (pulse.duration_ns / baseline.duration_ns);
}

}  // namespace sttsim::magnetics
