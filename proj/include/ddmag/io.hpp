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

// File formats: sweep and sensitivity CSV tables, versioned JSON run
// reports, atomic file replacement and static SVG plots.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddmag/magnetometry.hpp"

namespace ddmag {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trip decimal form ("%.17g"), locale independent.
std::string format_number(double value);

/// Columns: b_ac_tesla, contrast, contrast_stderr, protocol, n, f_ac_hz, temperature_mode.
std::string sweep_csv(std::span<const SignalCurve> curves);

/// Columns: protocol, n, f_ac_hz, temperature_mode, slope_per_tesla, sigma, total_time_s, eta_t_per_sqrt_hz.
std::string sensitivity_csv(std::span<const SensitivityReport> reports);

/// Parses the sweep CSV back into curves (grouped by consecutive metadata).
std::vector<SignalCurve> parse_sweep_csv(const std::string& text);

nlohmann::json to_json(const SignalCurve& curve);
nlohmann::json to_json(const SensitivityReport& report);
nlohmann::json to_json(const SinusoidFit& fit);

/// {schema_version, config, results, provenance{seed, version, timestamp}}.
nlohmann::json make_report(const nlohmann::json& config, const nlohmann::json& results, std::uint64_t seed);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// Optional tangent drawn through (slope_x, slope_y) with the given slope.
    bool has_slope_line = false;
    double slope_x = 0.0;
    double slope_y = 0.0;
    double slope = 0.0;
};

/// Minimal SVG line chart.
std::string render_svg(std::span<const PlotSeries> series, const std::string& x_label, const std::string& y_label);

/// Series for a curve, with the max-slope tangent of its sinusoid fit when one converges.
PlotSeries curve_series(const SignalCurve& curve, double x_scale = 1e6);

}  // namespace ddmag
