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

// Contrast-vs-amplitude sweeps, slope extraction and the two sensitivity
// estimates (from a measured curve, and from the coherence model), plus the
// pulse-number optimizer and the room/cryo comparison.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "ddmag/evolution.hpp"
#include "ddmag/fit.hpp"
#include "ddmag/seqgen.hpp"

namespace ddmag {

struct CurvePoint {
    double b_ac = 0.0;  // tesla
    double contrast = 0.0;
    double contrast_stderr = 0.0;
};

struct CurveMetadata {
    Protocol protocol = Protocol::kXy8;
    std::size_t n = 8;
    double f_ac = 0.0;
    TemperatureMode temperature = TemperatureMode::kRoom;
    std::uint64_t seed = 0;
};

struct SignalCurve {
    std::vector<CurvePoint> points;
    CurveMetadata meta;

    std::vector<double> amplitudes() const;
    std::vector<double> contrasts() const;
    /// True when every point sits at the same field amplitude.
    bool degenerate() const;
};

struct SweepRequest {
    Protocol protocol = Protocol::kXy8;
    std::size_t n = 8;
    double f_ac = 1e5;
    double b_min = 0.0;  // tesla
    double b_max = 0.0;
    std::size_t points = 64;
};

/// Uniform grid over [b_min, b_max]; point i uses sub-seed derive_seed(seed, i)
/// so the curve does not depend on the worker count. b_min == b_max gives a
/// degenerate (constant-amplitude) sweep.
SignalCurve sweep_amplitude(const SweepRequest& request, const SimulationSetup& setup, std::uint64_t seed,
                            int workers = 1);

/// Amplitude step pi f / (2 gamma) corresponding to 2 pi of phase in one field period.
double calibrate_amplitude_axis(double f_ac, const PhysicalConstants& constants);

/// Field amplitude over which the ideal n-pulse signal advances by one period, pi f / (gamma n).
double ideal_oscillation_period(std::size_t n, double f_ac, const PhysicalConstants& constants);

/// Fits the curve and returns the period of its dominant sinusoid (tesla).
/// Throws no-signal when the fit amplitude is below 3x the median stderr.
double oscillation_period(const SignalCurve& curve);

enum class SlopeMethod { kFit, kFiniteDifference };

/// Largest |dS/dB| (per tesla). The default fits a global sinusoid; the
/// finite-difference mode takes the steepest neighboring pair instead.
double fit_max_slope(const SignalCurve& curve, SlopeMethod method = SlopeMethod::kFit);

/// Full fit with the oscillation-detection check applied.
SinusoidFit fit_curve(const SignalCurve& curve);

struct SensitivityReport {
    double eta = 0.0;         // T / sqrt(Hz)
    double slope = 0.0;       // per tesla
    double sigma = 0.0;       // contrast standard error
    double total_time = 0.0;  // seconds
    std::size_t n = 0;
    double f_ac = 0.0;
    Protocol protocol = Protocol::kXy8;
    TemperatureMode temperature = TemperatureMode::kRoom;
};

/// eta = sigma sqrt(T) / slope.
SensitivityReport make_sensitivity_report(double slope, double sigma, double total_time, const CurveMetadata& meta);
SensitivityReport sensitivity_from_curve(const SignalCurve& curve, double sigma, double total_time,
                                         SlopeMethod method = SlopeMethod::kFit);

/// Shot-noise helper, 1 / sqrt(photons * repeats).
double shot_noise_sigma(double photons_per_shot, double repeats);

/// C(n) in the theoretical sensitivity.
class ContrastModel {
   public:
    virtual ~ContrastModel() = default;
    virtual double contrast(Protocol protocol, std::size_t n, double f_ac) const = 0;
};

class ConstantContrast final : public ContrastModel {
   public:
    explicit ConstantContrast(double value = 1.0) : value_(value) {}
    double contrast(Protocol, std::size_t, double) const override { return value_; }

   private:
    double value_;
};

/// C0 exp(-n / N_c).
class ExponentialContrast final : public ContrastModel {
   public:
    ExponentialContrast(double c0, double n_c) : c0_(c0), n_c_(n_c) {}
    double contrast(Protocol protocol, std::size_t n, double f_ac) const override;

   private:
    double c0_;
    double n_c_;
};

/// Oscillation amplitude of a simulated sweep (envelope off) spanning a
/// couple of ideal periods near zero field. Results are memoized.
class MonteCarloContrast final : public ContrastModel {
   public:
    struct Options {
        std::size_t points = 40;
        double periods = 2.0;
        std::uint64_t seed = 1;
    };

    explicit MonteCarloContrast(SimulationSetup setup);
    MonteCarloContrast(SimulationSetup setup, Options options);
    double contrast(Protocol protocol, std::size_t n, double f_ac) const override;

   private:
    SimulationSetup setup_;
    Options options_;
    mutable std::mutex mutex_;
    mutable std::map<std::tuple<Protocol, std::size_t, double>, double> cache_;
};

/// prefactor / (C sqrt(n / 2f)) * exp[(t / T2_eff(n))^p] with t = n / (2f).
/// In cryo mode this is exactly exp[(n^(1-s) / (2 T2^(1) f))^p].
double sensitivity_theoretical(std::size_t n, double f_ac, const CoherenceParams& cp, TemperatureMode mode,
                               double contrast, const PhysicalConstants& constants);

struct PulseScanPoint {
    std::size_t n = 0;
    double contrast = 0.0;
    double eta = 0.0;
};

struct PulseOptimum {
    std::size_t n_opt = 0;
    double eta_opt = 0.0;
    std::vector<PulseScanPoint> scan;
};

/// Exhaustive scan of the protocol's admissible counts up to n_max; ties go to the smaller n.
PulseOptimum optimize_pulse_number(Protocol protocol, double f_ac, const CoherenceParams& cp, TemperatureMode mode,
                                   const ContrastModel& contrast, const PhysicalConstants& constants,
                                   std::size_t n_max, int workers = 1);

struct TemperatureComparison {
    SignalCurve room;
    SignalCurve cryo;
    double slope_room = 0.0;
    double slope_cryo = 0.0;
    double ratio = 0.0;  // cryo / room
};

/// Sweeps and fits the same request in both temperature modes.
TemperatureComparison compare_temperatures(const SweepRequest& request, const SimulationSetup& setup,
                                           std::uint64_t seed, int workers = 1,
                                           SlopeMethod method = SlopeMethod::kFit);

}  // namespace ddmag
