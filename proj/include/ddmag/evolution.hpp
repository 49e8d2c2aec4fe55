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

#pragma once

// Bloch-vector evolution of the effective two-level NV spin through a
// synchronized pulse train in an AC field, with pulse imperfections, a
// hyperfine detuning ensemble and phenomenological decoherence envelopes.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ddmag/seqgen.hpp"

namespace ddmag {

struct BlochVector {
    double x = 1.0;
    double y = 0.0;
    double z = 0.0;

    static BlochVector along_x() { return {1.0, 0.0, 0.0}; }
    static BlochVector along_y() { return {0.0, 1.0, 0.0}; }
    static BlochVector along_z() { return {0.0, 0.0, 1.0}; }

    double norm() const;
    Eigen::Vector3d vec() const { return {x, y, z}; }
    static BlochVector from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// B(t) = amplitude * sin(2 pi f t + phase).
struct ACFieldSpec {
    double amplitude = 0.0;   // tesla
    double frequency = 1e5;   // hertz
    double phase = std::numbers::pi / 2.0;  // radians; pi/2 puts the pulses on zero crossings

    void validate() const;
    double value(double t) const;
    /// Exact integral of B over [t0, t1], in tesla-seconds.
    double integral(double t0, double t1) const;
};

/// Gyromagnetic ratio is derived from g, the Bohr magneton and hbar, so the
/// prefactor pi hbar / (2 g mu_B) equals 1 / (4 gamma).
struct PhysicalConstants {
    double g_factor = 2.003;
    double bohr_magneton = 9.2740100783e-24;  // J/T
    double hbar = 1.054571817e-34;            // J s

    /// Ordinary-frequency convention, Hz/T.
    double gamma() const;
    /// pi hbar / (2 g mu_B), tesla-seconds.
    double sensitivity_prefactor() const;

    static PhysicalConstants with_gamma(double gamma_hz_per_tesla);
};

struct PulseErrorModel {
    double angle_error = 0.01;      // fractional: actual angle = nominal * (1 + eps)
    double phase_error = 0.0;       // radians, added to every pulse axis
    double rabi_frequency = 6e6;    // hertz; a pi pulse lasts 1 / (2 Omega)
    double angle_jitter = 0.0;      // std dev of a per-pulse fractional angle error
    double phase_jitter = 0.0;      // std dev of a per-pulse phase error, radians

    bool angle_error_enabled = true;
    bool phase_error_enabled = true;
    bool off_resonance_enabled = true;
    // Detuned lines also precess at their offset between pulses.
    bool detuned_free_precession = false;
    bool finite_duration_enabled = false;
    bool jitter_enabled = true;

    static PulseErrorModel ideal();

    void validate() const;
    bool stochastic() const { return jitter_enabled && (angle_jitter > 0.0 || phase_jitter > 0.0); }
    /// Duration of a pulse of the given nominal angle, or 0 if finite duration is off.
    double pulse_duration(double nominal_angle = std::numbers::pi) const;
};

struct HyperfineLine {
    double offset = 0.0;  // hertz
    double weight = 1.0;
};

struct HyperfineEnsemble {
    std::vector<HyperfineLine> lines;

    /// 14N triplet {-A, 0, +A} with equal weights.
    static HyperfineEnsemble nitrogen14(double splitting = 2.16e6);
    static HyperfineEnsemble resonant();

    void validate() const;
};

enum class TemperatureMode { kRoom, kCryo };

std::string_view temperature_name(TemperatureMode mode);
TemperatureMode parse_temperature(std::string_view name);

struct CoherenceParams {
    double t1 = 5e-3;           // seconds
    double t2_hahn = 270e-6;    // seconds, single-pulse coherence time T2^(1)
    double scaling_exponent;    // s in T2(n) = T2^(1) n^s
    double stretch_exponent = 0.8;
    double t1_coupling;         // beta: room-temperature 1/T2 gains 1/(beta T1)
    double t1_cryo = std::numeric_limits<double>::infinity();  // infinite: no T1 term at 77 K

    CoherenceParams();

    void validate() const;
    /// T2(n) including the T1 saturation term for the mode's T1.
    double t2_effective(double n, TemperatureMode mode) const;
};

/// s such that T2^(1) n_ref^s = t2_at_ref.
double fit_scaling_exponent(double t2_hahn, double n_ref, double t2_at_ref);
/// beta such that the room-temperature T2(n) equals t2_room when the cryo value is t2_cryo.
double fit_t1_coupling(double t1, double t2_cryo, double t2_room);

/// One stochastic draw for a single pulse.
struct PulseDraw {
    double angle_offset = 0.0;  // fractional
    double phase_offset = 0.0;  // radians
};

/// Rotating-frame rotation produced by one (possibly imperfect) pulse.
/// `extra_detuning` adds to the hyperfine offset (frozen AC field during a finite pulse).
Eigen::Matrix3d pulse_rotation(const Pulse& pulse, const PulseErrorModel& err, double detuning,
                               PulseDraw draw = {}, double extra_detuning = 0.0);

/// Free precession about z between pulses (exact field integral) alternating
/// with pulse rotations. `draws` is empty or holds one entry per pulse.
BlochVector evolve_coherent(const TimedSequence& ts, const ACFieldSpec& field, const PulseErrorModel& err,
                            double detuning, const BlochVector& init, double gamma,
                            std::span<const PulseDraw> draws = {});

/// Toggling-frame phase 2 pi gamma * integral of s(t) B(t), closed form.
double accumulated_phase_analytic(const TimedSequence& ts, const ACFieldSpec& field, double gamma);

/// exp[-(t / T2_eff(n))^p]; cryo mode drops the T1 term.
double coherence_envelope(double n, double t, const CoherenceParams& cp, TemperatureMode mode);

/// Component of `final_state` along the equatorial axis at init_axis + pi/2.
double readout_contrast(const BlochVector& final_state, double init_axis = kPhaseX);

struct SimulationSetup {
    PulseErrorModel errors;
    HyperfineEnsemble hyperfine = HyperfineEnsemble::nitrogen14();
    CoherenceParams coherence;
    TemperatureMode temperature = TemperatureMode::kRoom;
    PhysicalConstants constants;
    PhaseInheritance inheritance = PhaseInheritance::kAbsolute;
    int realizations = 1;  // stochastic error draws averaged per point
    bool apply_envelope = true;

    void validate() const;
};

struct SignalEstimate {
    double contrast = 0.0;
    double standard_error = 0.0;  // across stochastic realizations; 0 for a deterministic model
};

/// Deterministic per-point seed derived from a master seed and a point index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Precomputes the timed sequence for one (protocol, n, f_AC) and evaluates
/// ensemble-averaged contrast at arbitrary field amplitudes.
class SignalSimulator {
   public:
    SignalSimulator(Protocol protocol, std::size_t n, double f_ac, SimulationSetup setup);

    /// Field synchronized to the sequence (zero crossings at the pulse centers).
    /// A negative amplitude is the same field shifted by half a period.
    SignalEstimate evaluate(double amplitude, std::uint64_t seed) const;
    SignalEstimate evaluate(const ACFieldSpec& field, std::uint64_t seed) const;

    const TimedSequence& timed_sequence() const { return ts_; }
    const SimulationSetup& setup() const { return setup_; }
    /// Envelope factor applied to every point (1 when disabled).
    double envelope() const { return envelope_; }

   private:
    double coherent_average(const ACFieldSpec& field, std::span<const PulseDraw> draws) const;

    TimedSequence ts_;
    SimulationSetup setup_;
    double envelope_ = 1.0;
    double gamma_ = 0.0;
    // Pulse rotations per hyperfine line, cached when they do not depend on the field.
    std::vector<std::vector<Eigen::Matrix3d>> cached_rotations_;
};

/// Expected readout contrast, averaged over the detuning ensemble and any
/// stochastic realizations, times the coherence envelope.
SignalEstimate simulate_signal(Protocol protocol, std::size_t n, const ACFieldSpec& field,
                               const SimulationSetup& setup, std::uint64_t seed);

}  // namespace ddmag
