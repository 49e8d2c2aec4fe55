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

// Least-squares fit of y = A sin(2 pi x / period + phase) + offset.

#include <span>

namespace ddmag {

struct SinusoidFit {
    double amplitude = 0.0;  // >= 0
    double period = 0.0;     // in units of x
    double phase = 0.0;      // radians
    double offset = 0.0;
    double rms_residual = 0.0;

    /// Largest |dy/dx| of the fitted curve, A 2 pi / period.
    double max_slope() const;
    double operator()(double x) const;
};

struct SinusoidFitOptions {
    double min_cycles = 0.5;      // longest period searched is span / min_cycles
    int scan_oversampling = 16;   // trial frequencies per spectral bin
    int max_iterations = 200;
};

/// Variable-projection fit: a discrete spectrum scan picks the starting
/// frequency, Brent refinement then minimizes the residual of the linear
/// (sin, cos, 1) subproblem. Needs >= 8 strictly increasing x values.
/// Throws FitError for flat data or a refinement that does not converge.
SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y,
                         const SinusoidFitOptions& options = {});

}  // namespace ddmag
