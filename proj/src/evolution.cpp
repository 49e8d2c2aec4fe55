// Copyright 2026 The ddmag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ddmag/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ddmag/error.hpp"

namespace ddmag {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& unit_axis, double angle) {
    return Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
}

void rotate_about_z(Eigen::Vector3d& v, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double x = v.x();
    v.x() = c * x - s * v.y();
    v.y() = s * x + c * v.y();
}

void require(bool ok, const std::string& message) {
    if (!ok) fail(ErrorCategory::kInvalidArgument, message);
}

}  // namespace

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

// ---------------------------------------------------------------------------
// Field and constants
// ---------------------------------------------------------------------------

void ACFieldSpec::validate() const {
    require(frequency > 0.0 && std::isfinite(frequency), "AC frequency must be positive");
    require(amplitude >= 0.0 && std::isfinite(amplitude), "AC amplitude must be finite and >= 0");
    require(phase >= 0.0 && phase < kTwoPi, "AC phase must lie in [0, 2pi)");
}

double ACFieldSpec::value(double t) const { return amplitude * std::sin(kTwoPi * frequency * t + phase); }

double ACFieldSpec::integral(double t0, double t1) const {
    const double omega = kTwoPi * frequency;
    // cos(a) - cos(b) written as a product stays accurate for short intervals
    const double mid = omega * 0.5 * (t0 + t1) + phase;
    const double half = omega * 0.5 * (t1 - t0);
    return amplitude * 2.0 * std::sin(mid) * std::sin(half) / omega;
}

double PhysicalConstants::gamma() const { return g_factor * bohr_magneton / (kTwoPi * hbar); }

double PhysicalConstants::sensitivity_prefactor() const {
    return kPi * hbar / (2.0 * g_factor * bohr_magneton);
}

PhysicalConstants PhysicalConstants::with_gamma(double gamma_hz_per_tesla) {
    PhysicalConstants c;
    c.g_factor = gamma_hz_per_tesla * kTwoPi * c.hbar / c.bohr_magneton;
    return c;
}

// ---------------------------------------------------------------------------
// Error models
// ---------------------------------------------------------------------------

PulseErrorModel PulseErrorModel::ideal() {
    PulseErrorModel m;
    m.angle_error_enabled = false;
    m.phase_error_enabled = false;
    m.off_resonance_enabled = false;
    m.finite_duration_enabled = false;
    m.jitter_enabled = false;
    return m;
}

void PulseErrorModel::validate() const {
    require(std::abs(angle_error) < 1.0, "angle error fraction must satisfy |eps| < 1");
    require(std::isfinite(phase_error), "phase error must be finite");
    require(angle_jitter >= 0.0 && phase_jitter >= 0.0, "jitter widths must be nonnegative");
    require(!finite_duration_enabled || rabi_frequency > 0.0,
            "Rabi frequency must be positive when finite pulse duration is enabled");
    require(std::isfinite(rabi_frequency) && rabi_frequency >= 0.0, "Rabi frequency must be >= 0");
}

double PulseErrorModel::pulse_duration(double nominal_angle) const {
    if (!finite_duration_enabled) return 0.0;
    require(rabi_frequency > 0.0, "Rabi frequency must be positive when finite pulse duration is enabled");
    return nominal_angle / (kTwoPi * rabi_frequency);
}

HyperfineEnsemble HyperfineEnsemble::nitrogen14(double splitting) {
    const double w = 1.0 / 3.0;
    return HyperfineEnsemble{{{-splitting, w}, {0.0, w}, {splitting, w}}};
}

HyperfineEnsemble HyperfineEnsemble::resonant() { return HyperfineEnsemble{{{0.0, 1.0}}}; }

void HyperfineEnsemble::validate() const {
    require(!lines.empty(), "hyperfine ensemble needs at least one line");
    double total = 0.0;
    for (const auto& line : lines) {
        require(line.weight >= 0.0 && std::isfinite(line.offset), "hyperfine weights must be >= 0");
        total += line.weight;
    }
    require(std::abs(total - 1.0) < 1e-9, "hyperfine weights must sum to 1");
}

std::string_view temperature_name(TemperatureMode mode) {
    return mode == TemperatureMode::kRoom ? "room" : "cryo";
}

TemperatureMode parse_temperature(std::string_view name) {
    if (name == "room") return TemperatureMode::kRoom;
    if (name == "cryo") return TemperatureMode::kCryo;
    fail(ErrorCategory::kInvalidArgument, "temperature mode must be 'room' or 'cryo'");
}

double fit_scaling_exponent(double t2_hahn, double n_ref, double t2_at_ref) {
    require(t2_hahn > 0.0 && n_ref > 1.0 && t2_at_ref > 0.0, "invalid coherence anchor");
    return std::log(t2_at_ref / t2_hahn) / std::log(n_ref);
}

double fit_t1_coupling(double t1, double t2_cryo, double t2_room) {
    require(t1 > 0.0 && t2_room > 0.0 && t2_cryo > t2_room, "room T2 must be shorter than cryo T2");
    return 1.0 / (t1 * (1.0 / t2_room - 1.0 / t2_cryo));
}

// Sample anchors: T2(48) is 4 ms at 77 K and 1.2 ms at room temperature.
CoherenceParams::CoherenceParams()
    : scaling_exponent(fit_scaling_exponent(270e-6, 48.0, 4e-3)),
      t1_coupling(fit_t1_coupling(5e-3, 4e-3, 1.2e-3)) {}

void CoherenceParams::validate() const {
    require(t1 > 0.0 && t2_hahn > 0.0 && t1_coupling > 0.0 && t1_cryo > 0.0, "coherence times must be positive");
    require(scaling_exponent > 0.0 && scaling_exponent <= 1.0, "scaling exponent s must lie in (0, 1]");
    require(stretch_exponent > 0.0 && stretch_exponent <= 3.0, "stretch exponent p must lie in (0, 3]");
}

double CoherenceParams::t2_effective(double n, TemperatureMode mode) const {
    double rate = 1.0 / (t2_hahn * std::pow(n, scaling_exponent));
    const double relaxation = mode == TemperatureMode::kRoom ? t1 : t1_cryo;
    if (std::isfinite(relaxation)) rate += 1.0 / (t1_coupling * relaxation);
    return 1.0 / rate;
}

double coherence_envelope(double n, double t, const CoherenceParams& cp, TemperatureMode mode) {
    require(n >= 1.0, "envelope needs n >= 1");
    require(t >= 0.0, "envelope needs t >= 0");
    if (t == 0.0) return 1.0;
    return std::exp(-std::pow(t / cp.t2_effective(n, mode), cp.stretch_exponent));
}

// ---------------------------------------------------------------------------
// Evolution
// ---------------------------------------------------------------------------

Eigen::Matrix3d pulse_rotation(const Pulse& pulse, const PulseErrorModel& err, double detuning, PulseDraw draw,
                               double extra_detuning) {
    double phase = pulse.phase_axis;
    double eps = 0.0;
    if (err.phase_error_enabled) phase += err.phase_error;
    if (err.angle_error_enabled) eps += err.angle_error;
    if (err.jitter_enabled) {
        phase += draw.phase_offset;
        eps += draw.angle_offset;
    }
    const double delta = (err.off_resonance_enabled ? detuning : 0.0) + extra_detuning;
    const double angle = pulse.nominal_angle * (1.0 + eps);

    if (delta == 0.0) {
        return axis_angle(Eigen::Vector3d(std::cos(phase), std::sin(phase), 0.0), angle);
    }
    require(err.rabi_frequency > 0.0, "off-resonant pulse needs a positive Rabi frequency");
    const double omega = err.rabi_frequency;
    const double omega_eff = std::hypot(omega, delta);
    const Eigen::Vector3d axis(omega * std::cos(phase) / omega_eff, omega * std::sin(phase) / omega_eff,
                               delta / omega_eff);
    // Driven for t_p = angle / (2 pi Omega) at the generalized Rabi frequency.
    return axis_angle(axis, angle * omega_eff / omega);
}

namespace {

// Shared stepping loop; `rotation(k, center)` returns the k-th pulse rotation.
// `free_detuning` (Hz) adds a static precession rate between pulses.
template <typename RotationFn>
Eigen::Vector3d step_through(const TimedSequence& ts, const ACFieldSpec& field, double gamma, double free_detuning,
                             Eigen::Vector3d v, RotationFn&& rotation) {
    const double half = 0.5 * ts.pulse_duration;
    auto precess = [&](double t0, double t1) {
        rotate_about_z(v, kTwoPi * (gamma * field.integral(t0, t1) + free_detuning * (t1 - t0)));
    };
    double t_prev = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double center = ts.pulse_times[k];
        precess(t_prev, center - half);
        v = rotation(k, center) * v;
        t_prev = center + half;
    }
    precess(t_prev, ts.total_time);
    return v;
}

double free_detuning(const PulseErrorModel& err, double detuning) {
    return err.off_resonance_enabled && err.detuned_free_precession ? detuning : 0.0;
}

}  // namespace

BlochVector evolve_coherent(const TimedSequence& ts, const ACFieldSpec& field, const PulseErrorModel& err,
                            double detuning, const BlochVector& init, double gamma,
                            std::span<const PulseDraw> draws) {
    require(draws.empty() || draws.size() == ts.size(), "need one stochastic draw per pulse");
    const bool finite = ts.pulse_duration > 0.0;
    const Eigen::Vector3d v = step_through(ts, field, gamma, free_detuning(err, detuning), init.vec(), [&](std::size_t k, double center) {
        const PulseDraw draw = draws.empty() ? PulseDraw{} : draws[k];
        // frozen-field approximation: sample B at the pulse center
        const double extra = finite ? gamma * field.value(center) : 0.0;
        return pulse_rotation(ts.base.pulses[k], err, detuning, draw, extra);
    });
    return BlochVector::from(v);
}

double accumulated_phase_analytic(const TimedSequence& ts, const ACFieldSpec& field, double gamma) {
    double phase = 0.0;
    double sign = 1.0;
    double t_prev = 0.0;
    for (double center : ts.pulse_times) {
        phase += sign * field.integral(t_prev, center);
        sign = -sign;
        t_prev = center;
    }
    phase += sign * field.integral(t_prev, ts.total_time);
    return kTwoPi * gamma * phase;
}

double readout_contrast(const BlochVector& final_state, double init_axis) {
    const double axis = init_axis + kPi / 2.0;
    return final_state.x * std::cos(axis) + final_state.y * std::sin(axis);
}

// ---------------------------------------------------------------------------
// Ensemble signal
// ---------------------------------------------------------------------------

void SimulationSetup::validate() const {
    errors.validate();
    hyperfine.validate();
    coherence.validate();
    require(constants.g_factor > 0.0 && constants.bohr_magneton > 0.0 && constants.hbar > 0.0,
            "physical constants must be positive");
    require(realizations >= 1, "need at least one realization");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 finalizer over a golden-ratio stride
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SignalSimulator::SignalSimulator(Protocol protocol, std::size_t n, double f_ac, SimulationSetup setup)
    : setup_(std::move(setup)) {
    setup_.validate();
    ts_ = synchronize(build_sequence(protocol, n, setup_.inheritance), f_ac, setup_.errors.pulse_duration());
    gamma_ = setup_.constants.gamma();
    if (setup_.apply_envelope) {
        envelope_ = coherence_envelope(static_cast<double>(n), ts_.total_time, setup_.coherence, setup_.temperature);
    }
    if (!setup_.errors.stochastic() && ts_.pulse_duration == 0.0) {
        for (const auto& line : setup_.hyperfine.lines) {
            std::vector<Eigen::Matrix3d> rotations;
            rotations.reserve(ts_.size());
            for (const Pulse& p : ts_.base.pulses) rotations.push_back(pulse_rotation(p, setup_.errors, line.offset));
            cached_rotations_.push_back(std::move(rotations));
        }
    }
}

double SignalSimulator::coherent_average(const ACFieldSpec& field, std::span<const PulseDraw> draws) const {
    double total = 0.0;
    const auto& lines = setup_.hyperfine.lines;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].weight == 0.0) continue;
        BlochVector final_state;
        if (!cached_rotations_.empty()) {
            const auto& rotations = cached_rotations_[i];
            final_state = BlochVector::from(step_through(ts_, field, gamma_, free_detuning(setup_.errors, lines[i].offset),
                                                         BlochVector::along_x().vec(),
                                                         [&](std::size_t k, double) { return rotations[k]; }));
        } else {
            final_state = evolve_coherent(ts_, field, setup_.errors, lines[i].offset, BlochVector::along_x(), gamma_,
                                          draws);
        }
        total += lines[i].weight * readout_contrast(final_state, kPhaseX);
    }
    return total;
}

SignalEstimate SignalSimulator::evaluate(double amplitude, std::uint64_t seed) const {
    ACFieldSpec field;
    field.amplitude = amplitude;
    field.frequency = ts_.sync_frequency;
    field.phase = kPi / 2.0;
    return evaluate(field, seed);
}

SignalEstimate SignalSimulator::evaluate(const ACFieldSpec& field, std::uint64_t seed) const {
    if (!setup_.errors.stochastic()) {
        return {envelope_ * coherent_average(field, {}), 0.0};
    }

    const auto& err = setup_.errors;
    const int r_count = setup_.realizations;
    std::vector<PulseDraw> draws(ts_.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int r = 0; r < r_count; ++r) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        std::normal_distribution<double> angle(0.0, err.angle_jitter);
        std::normal_distribution<double> phase(0.0, err.phase_jitter);
        for (auto& d : draws) {
            d.angle_offset = err.angle_jitter > 0.0 ? angle(rng) : 0.0;
            d.phase_offset = err.phase_jitter > 0.0 ? phase(rng) : 0.0;
        }
        const double c = envelope_ * coherent_average(field, draws);
        sum += c;
        sum_sq += c * c;
    }
    const double mean = sum / r_count;
    double sem = 0.0;
    if (r_count > 1) {
        const double var = std::max(0.0, (sum_sq - r_count * mean * mean) / (r_count - 1));
        sem = std::sqrt(var / r_count);
    }
    return {mean, sem};
}

SignalEstimate simulate_signal(Protocol protocol, std::size_t n, const ACFieldSpec& field,
                               const SimulationSetup& setup, std::uint64_t seed) {
    field.validate();
    const SignalSimulator sim(protocol, n, field.frequency, setup);
    return sim.evaluate(field, seed);
}

}  // namespace ddmag
