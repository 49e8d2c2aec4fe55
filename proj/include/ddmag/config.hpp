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

// Run configuration: one JSON document with sample, errors, experiment and
// analysis blocks. Keys carry unit suffixes (t2_hahn_us, f_ac_khz, ...).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddmag/evolution.hpp"
#include "ddmag/magnetometry.hpp"

namespace ddmag {

struct ExperimentConfig {
    std::vector<Protocol> protocols{Protocol::kXy8};
    std::size_t n = 72;
    std::optional<int> level;  // CXY8 concatenation level; overrides n when set
    std::vector<double> f_ac{1e5};  // hertz
    double b_min = 0.0;              // tesla
    std::optional<double> b_max;     // tesla; unset means b_min + b_range_periods ideal periods
    double b_range_periods = 2.0;
    std::size_t points = 64;
    std::uint64_t seed = 1;

    /// Pulse count for a protocol; `level` only applies to CXY8.
    std::size_t pulse_count(Protocol protocol) const;
    /// Upper end of the field grid for a given (n, f).
    double b_max_for(std::size_t n, double f_ac, const PhysicalConstants& constants) const;
};

enum class SigmaModel { kDirect, kShotNoise };
enum class ContrastModelKind { kMonteCarlo, kExponential, kConstant };

struct AnalysisConfig {
    SigmaModel sigma_model = SigmaModel::kDirect;
    double sigma = 0.01;
    double photons_per_shot = 0.01;
    double repeats = 1e6;
    double total_time = 1.0;  // seconds
    std::optional<double> eta_anchor;  // T/sqrt(Hz); calibrates sigma sqrt(T) on the first curve
    std::size_t n_max = 1200;
    ContrastModelKind contrast_model = ContrastModelKind::kMonteCarlo;
    double contrast_c0 = 1.0;
    double contrast_n_c = 1000.0;
    std::size_t contrast_points = 40;
    SlopeMethod slope_method = SlopeMethod::kFit;
    std::string output_dir = "out";
    bool plot = false;
    int workers = 1;

    double effective_sigma() const;
};

struct RunConfig {
    SimulationSetup setup;
    ExperimentConfig experiment;
    AnalysisConfig analysis;

    void validate() const;
};

/// Parses and validates. Unknown keys are errors in strict mode and are
/// otherwise appended to `warnings`.
RunConfig parse_run_config(const nlohmann::json& doc, bool strict, std::vector<std::string>* warnings = nullptr);
RunConfig load_run_config(const std::filesystem::path& path, bool strict,
                          std::vector<std::string>* warnings = nullptr);

/// Fully resolved configuration (every key, defaults expanded).
nlohmann::json to_json(const RunConfig& config);

/// Contrast model C(n) selected by the analysis block.
std::unique_ptr<ContrastModel> make_contrast_model(const RunConfig& config);

}  // namespace ddmag
