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

#include "ddmag/magnetometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ddmag/error.hpp"
#include "ddmag/parallel.hpp"

namespace ddmag {
namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& message) {
    if (!ok) fail(ErrorCategory::kInvalidArgument, message);
}

double median_stderr(const SignalCurve& curve) {
    std::vector<double> e;
    e.reserve(curve.points.size());
    for (const auto& p : curve.points) e.push_back(p.contrast_stderr);
    if (e.empty()) return 0.0;
    const auto mid = e.begin() + static_cast<std::ptrdiff_t>(e.size() / 2);
    std::nth_element(e.begin(), mid, e.end());
    return *mid;
}

// Fit plus the oscillation-detection check; throws no-signal on failure.
SinusoidFit fit_detected(const SignalCurve& curve) {
    require(curve.points.size() >= 8, "fit needs at least 8 curve points");
    const auto b = curve.amplitudes();
    const auto c = curve.contrasts();
    const SinusoidFit fit = fit_sinusoid(b, c);
    const double noise = 3.0 * median_stderr(curve);
    if (fit.amplitude < noise) {
        fail(ErrorCategory::kNoSignal, "oscillation amplitude " + std::to_string(fit.amplitude) +
                                           " is below 3x the median stderr (" + std::to_string(noise) + ")");
    }
    return fit;
}

}  // namespace

std::vector<double> SignalCurve::amplitudes() const {
    std::vector<double> b;
    b.reserve(points.size());
    for (const auto& p : points) b.push_back(p.b_ac);
    return b;
}

std::vector<double> SignalCurve::contrasts() const {
    std::vector<double> c;
    c.reserve(points.size());
    for (const auto& p : points) c.push_back(p.contrast);
    return c;
}

bool SignalCurve::degenerate() const {
    return std::all_of(points.begin(), points.end(),
                       [&](const CurvePoint& p) { return p.b_ac == points.front().b_ac; });
}

SignalCurve sweep_amplitude(const SweepRequest& request, const SimulationSetup& setup, std::uint64_t seed,
                            int workers) {
    require(std::isfinite(request.b_min) && std::isfinite(request.b_max), "field range must be finite");
    require(request.b_min <= request.b_max, "field range must satisfy b_min <= b_max");
    require(request.points >= 8, "a sweep needs at least 8 points");

    const SignalSimulator sim(request.protocol, request.n, request.f_ac, setup);
    SignalCurve curve;
    curve.meta = {request.protocol, request.n, request.f_ac, setup.temperature, seed};
    curve.points.resize(request.points);
    const double step = (request.b_max - request.b_min) / static_cast<double>(request.points - 1);
    parallel_for(request.points, workers, [&](std::size_t i) {
        const double b = i + 1 == request.points ? request.b_max : request.b_min + step * static_cast<double>(i);
        const SignalEstimate est = sim.evaluate(b, derive_seed(seed, i));
        curve.points[i] = {b, est.contrast, est.standard_error};
    });
    return curve;
}

double calibrate_amplitude_axis(double f_ac, const PhysicalConstants& constants) {
    require(f_ac > 0.0, "f_AC must be positive");
    return kPi * f_ac / (2.0 * constants.gamma());
}

double ideal_oscillation_period(std::size_t n, double f_ac, const PhysicalConstants& constants) {
    require(n >= 1 && f_ac > 0.0, "need n >= 1 and f_AC > 0");
    return kPi * f_ac / (constants.gamma() * static_cast<double>(n));
}

SinusoidFit fit_curve(const SignalCurve& curve) {
    if (curve.degenerate()) throw FitError("degenerate sweep: all field amplitudes are equal", 0.0, 0.0, 0.0);
    try {
        return fit_detected(curve);
    } catch (const FitError&) {
        throw;
    } catch (const Error& e) {
        if (e.category() != ErrorCategory::kNoSignal) throw;
        throw FitError(e.what(), 0.0, 0.0, 0.0);
    }
}

double oscillation_period(const SignalCurve& curve) {
    SinusoidFit fit;
    try {
        fit = fit_curve(curve);
    } catch (const FitError& e) {
        fail(ErrorCategory::kNoSignal, std::string("no oscillation detected: ") + e.what());
    }
    const double span = curve.points.back().b_ac - curve.points.front().b_ac;
    if (span < 1.5 * fit.period) {
        fail(ErrorCategory::kNoSignal, "curve spans fewer than 1.5 oscillation periods");
    }
    return fit.period;
}

double fit_max_slope(const SignalCurve& curve, SlopeMethod method) {
    if (method == SlopeMethod::kFit) return fit_curve(curve).max_slope();
    if (curve.degenerate()) throw FitError("degenerate sweep: all field amplitudes are equal", 0.0, 0.0, 0.0);

    require(curve.points.size() >= 2, "finite differences need two points");
    double best = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const double db = curve.points[i].b_ac - curve.points[i - 1].b_ac;
        require(db > 0.0, "field amplitudes must be strictly increasing");
        best = std::max(best, std::abs(curve.points[i].contrast - curve.points[i - 1].contrast) / db);
    }
    if (!(best > 0.0)) throw FitError("flat curve: zero finite-difference slope", 0.0, 0.0, 0.0);
    return best;
}

SensitivityReport make_sensitivity_report(double slope, double sigma, double total_time, const CurveMetadata& meta) {
    require(sigma > 0.0 && total_time > 0.0, "sigma and T must be positive");
    require(slope > 0.0 && std::isfinite(slope), "slope must be positive");
    SensitivityReport r;
    r.slope = slope;
    r.sigma = sigma;
    r.total_time = total_time;
    r.eta = sigma * std::sqrt(total_time) / slope;
    r.n = meta.n;
    r.f_ac = meta.f_ac;
    r.protocol = meta.protocol;
    r.temperature = meta.temperature;
    return r;
}

SensitivityReport sensitivity_from_curve(const SignalCurve& curve, double sigma, double total_time,
                                         SlopeMethod method) {
    require(sigma > 0.0 && total_time > 0.0, "sigma and T must be positive");
    return make_sensitivity_report(fit_max_slope(curve, method), sigma, total_time, curve.meta);
}

double shot_noise_sigma(double photons_per_shot, double repeats) {
    require(photons_per_shot > 0.0 && repeats > 0.0, "photon count and repeats must be positive");
    return 1.0 / std::sqrt(photons_per_shot * repeats);
}

// ---------------------------------------------------------------------------
// Contrast models and the theoretical sensitivity
// ---------------------------------------------------------------------------

double ExponentialContrast::contrast(Protocol, std::size_t n, double) const {
    return c0_ * std::exp(-static_cast<double>(n) / n_c_);
}

MonteCarloContrast::MonteCarloContrast(SimulationSetup setup) : MonteCarloContrast(std::move(setup), Options{}) {}

MonteCarloContrast::MonteCarloContrast(SimulationSetup setup, Options options)
    : setup_(std::move(setup)), options_(options) {
    setup_.apply_envelope = false;
    setup_.validate();
}

double MonteCarloContrast::contrast(Protocol protocol, std::size_t n, double f_ac) const {
    const auto key = std::make_tuple(protocol, n, f_ac);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    SweepRequest request;
    request.protocol = protocol;
    request.n = n;
    request.f_ac = f_ac;
    request.b_min = 0.0;
    request.b_max = options_.periods * ideal_oscillation_period(n, f_ac, setup_.constants);
    request.points = options_.points;
    const SignalCurve curve = sweep_amplitude(request, setup_, options_.seed);
    double value = 0.0;
    try {
        value = std::min(1.0, fit_sinusoid(curve.amplitudes(), curve.contrasts()).amplitude);
    } catch (const FitError&) {
        value = 0.0;
    }
    std::lock_guard lock(mutex_);
    cache_.emplace(key, value);
    return value;
}

double sensitivity_theoretical(std::size_t n, double f_ac, const CoherenceParams& cp, TemperatureMode mode,
                               double contrast, const PhysicalConstants& constants) {
    require(n >= 1 && f_ac > 0.0, "need n >= 1 and f_AC > 0");
    require(contrast > 0.0 && contrast <= 1.0, "contrast C(n) must lie in (0, 1]");
    const double nd = static_cast<double>(n);
    const double t = nd / (2.0 * f_ac);
    const double decay = std::pow(t / cp.t2_effective(nd, mode), cp.stretch_exponent);
    return constants.sensitivity_prefactor() / (contrast * std::sqrt(t)) * std::exp(decay);
}

PulseOptimum optimize_pulse_number(Protocol protocol, double f_ac, const CoherenceParams& cp, TemperatureMode mode,
                                   const ContrastModel& contrast, const PhysicalConstants& constants,
                                   std::size_t n_max, int workers) {
    require(n_max >= 8, "n_max must be at least 8");
    const auto counts = admissible_pulse_counts(protocol, n_max);
    require(!counts.empty(), "no admissible pulse counts below n_max");

    PulseOptimum result;
    result.scan.resize(counts.size());
    parallel_for(counts.size(), workers, [&](std::size_t i) {
        const std::size_t n = counts[i];
        const double c = contrast.contrast(protocol, n, f_ac);
        const double eta = c > 0.0 ? sensitivity_theoretical(n, f_ac, cp, mode, std::min(c, 1.0), constants)
                                   : std::numeric_limits<double>::infinity();
        result.scan[i] = {n, c, eta};
    });
    result.eta_opt = std::numeric_limits<double>::infinity();
    for (const auto& point : result.scan) {
        if (point.eta < result.eta_opt) {
            result.eta_opt = point.eta;
            result.n_opt = point.n;
        }
    }
    if (result.n_opt == 0) fail(ErrorCategory::kNoSignal, "contrast vanished for every admissible pulse count");
    return result;
}

TemperatureComparison compare_temperatures(const SweepRequest& request, const SimulationSetup& setup,
                                           std::uint64_t seed, int workers, SlopeMethod method) {
    TemperatureComparison out;
    SimulationSetup room = setup;
    room.temperature = TemperatureMode::kRoom;
    room.apply_envelope = true;
    SimulationSetup cryo = room;
    cryo.temperature = TemperatureMode::kCryo;
    out.room = sweep_amplitude(request, room, seed, workers);
    out.cryo = sweep_amplitude(request, cryo, seed, workers);
    out.slope_room = fit_max_slope(out.room, method);
    out.slope_cryo = fit_max_slope(out.cryo, method);
    out.ratio = out.slope_cryo / out.slope_room;
    return out;
}

}  // namespace ddmag
