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

#include "ddmag/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "ddmag/error.hpp"

namespace ddmag {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct LinearSolution {
    double sin_coeff = 0.0;
    double cos_coeff = 0.0;
    double offset = 0.0;
    double residual = 0.0;  // sum of squares
};

// Best (sin, cos, 1) combination at angular frequency w over normalized abscissae.
LinearSolution solve_linear(const std::vector<double>& u, std::span<const double> y, double w) {
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Eigen::Vector3d row(std::sin(w * u[i]), std::cos(w * u[i]), 1.0);
        normal.noalias() += row * row.transpose();
        rhs.noalias() += row * y[i];
    }
    const Eigen::Vector3d c = normal.colPivHouseholderQr().solve(rhs);
    LinearSolution s{c(0), c(1), c(2), 0.0};
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = c(0) * std::sin(w * u[i]) + c(1) * std::cos(w * u[i]) + c(2) - y[i];
        s.residual += r * r;
    }
    return s;
}

}  // namespace

double SinusoidFit::max_slope() const { return amplitude * kTwoPi / period; }

double SinusoidFit::operator()(double x) const {
    return amplitude * std::sin(kTwoPi * x / period + phase) + offset;
}

SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y, const SinusoidFitOptions& options) {
    if (x.size() != y.size()) fail(ErrorCategory::kInvalidArgument, "x and y sizes differ");
    if (x.size() < 8) fail(ErrorCategory::kInvalidArgument, "sinusoid fit needs at least 8 points");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) fail(ErrorCategory::kInvalidArgument, "non-finite data");
        if (i > 0 && !(x[i] > x[i - 1])) fail(ErrorCategory::kInvalidArgument, "x must be strictly increasing");
    }

    const double x0 = x.front();
    const double span = x.back() - x0;
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = (x[i] - x0) / span;

    const auto [y_min, y_max] = std::minmax_element(y.begin(), y.end());
    const double scale = std::max(1.0, std::max(std::abs(*y_min), std::abs(*y_max)));
    if (*y_max - *y_min <= 1e-12 * scale) {
        throw FitError("flat curve: no oscillation to fit", 0.0, 0.0, 0.0);
    }

    // Spectrum scan, in cycles per span, up to the mean-spacing Nyquist limit.
    const double nyquist = 0.5 * static_cast<double>(x.size() - 1);
    const double step = 1.0 / options.scan_oversampling;
    double best_cycles = options.min_cycles;
    double best_residual = std::numeric_limits<double>::infinity();
    for (double k = options.min_cycles; k <= nyquist; k += step) {
        const double r = solve_linear(u, y, kTwoPi * k).residual;
        if (r < best_residual) {
            best_residual = r;
            best_cycles = k;
        }
    }

    const double lo = std::max(0.5 * options.min_cycles, best_cycles - step);
    const double hi = std::min(nyquist, best_cycles + step);
    std::uintmax_t iterations = static_cast<std::uintmax_t>(options.max_iterations);
    const auto [cycles, residual] = boost::math::tools::brent_find_minima(
        [&](double k) { return solve_linear(u, y, kTwoPi * k).residual; }, lo, hi,
        std::numeric_limits<double>::digits / 2, iterations);

    const double w = kTwoPi * cycles;
    const LinearSolution s = solve_linear(u, y, w);
    SinusoidFit fit;
    fit.amplitude = std::hypot(s.sin_coeff, s.cos_coeff);
    fit.period = span / cycles;
    fit.offset = s.offset;
    fit.rms_residual = std::sqrt(residual / static_cast<double>(x.size()));
    double phase = std::atan2(s.cos_coeff, s.sin_coeff) - w * x0 / span;
    phase = std::fmod(phase, kTwoPi);
    if (phase < 0.0) phase += kTwoPi;
    fit.phase = phase;

    if (iterations >= static_cast<std::uintmax_t>(options.max_iterations)) {
        throw FitError("frequency refinement did not converge after " + std::to_string(iterations) + " iterations",
                       fit.rms_residual, fit.amplitude, fit.period);
    }
    if (!(fit.amplitude > 1e-12 * scale)) {
        throw FitError("fitted amplitude is zero", fit.rms_residual, fit.amplitude, fit.period);
    }
    return fit;
}

}  // namespace ddmag
