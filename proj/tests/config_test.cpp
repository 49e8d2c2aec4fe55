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

#include "ddmag/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "ddmag/error.hpp"

using namespace ddmag;
using nlohmann::json;

namespace {

ErrorCategory category_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.category();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCategory::kIo;
}

RunConfig parse(const std::string& text, bool strict = true) { return parse_run_config(json::parse(text), strict); }

}  // namespace

TEST(config, defaults) {
    const RunConfig cfg = parse("{}");
    EXPECT_EQ(cfg.setup.errors.angle_error, 0.01);
    EXPECT_EQ(cfg.setup.errors.rabi_frequency, 6e6);
    EXPECT_EQ(cfg.setup.hyperfine.lines.size(), 3u);
    EXPECT_EQ(cfg.setup.coherence.t2_hahn, 270e-6);
    EXPECT_EQ(cfg.setup.coherence.t1, 5e-3);
    EXPECT_TRUE(std::isinf(cfg.setup.coherence.t1_cryo));
    EXPECT_EQ(cfg.setup.temperature, TemperatureMode::kRoom);
    EXPECT_EQ(cfg.experiment.protocols, std::vector<Protocol>{Protocol::kXy8});
    EXPECT_EQ(cfg.experiment.f_ac, std::vector<double>{1e5});
    EXPECT_FALSE(cfg.experiment.b_max.has_value());
    EXPECT_EQ(cfg.analysis.workers, 1);
}

TEST(config, unit_suffixes) {
    const RunConfig cfg = parse(R"({
        "sample": {"t1_ms": 6, "t1_cryo_ms": 5000, "t2_hahn_us": 300, "stretch_exponent": 1.0, "g_factor": 2.0},
        "errors": {"angle_error": -0.02, "phase_error_rad": 0.01, "rabi_frequency_mhz": 10,
                   "hyperfine_lines": [{"offset_mhz": -1, "weight": 0.25}, {"offset_mhz": 1, "weight": 0.75}]},
        "experiment": {"protocols": ["cpmg", "CXY8"], "n": 16, "level": 1, "f_ac_khz": [10, 25],
                       "b_min_ut": 0.5, "b_max_ut": 2, "points": 20, "seed": 12345678901234,
                       "temperature_mode": "cryo", "phase_inheritance": "shifted"},
        "analysis": {"sigma_model": "shot-noise", "photons_per_shot": 0.02, "repeats": 5e5, "total_time_s": 2,
                     "eta_anchor_nt": 9, "n_max": 600, "contrast_model": "exponential", "output_dir": "x",
                     "slope_method": "finite-difference", "workers": 3}
    })");
    EXPECT_DOUBLE_EQ(cfg.setup.coherence.t1, 6e-3);
    EXPECT_DOUBLE_EQ(cfg.setup.coherence.t1_cryo, 5.0);
    EXPECT_DOUBLE_EQ(cfg.setup.coherence.t2_hahn, 300e-6);
    EXPECT_EQ(cfg.setup.constants.g_factor, 2.0);
    EXPECT_DOUBLE_EQ(cfg.setup.errors.rabi_frequency, 10e6);
    EXPECT_DOUBLE_EQ(cfg.setup.hyperfine.lines[1].offset, 1e6);
    EXPECT_EQ(cfg.setup.temperature, TemperatureMode::kCryo);
    EXPECT_EQ(cfg.setup.inheritance, PhaseInheritance::kShifted);
    EXPECT_EQ(cfg.experiment.f_ac, (std::vector<double>{1e4, 2.5e4}));
    EXPECT_DOUBLE_EQ(cfg.experiment.b_min, 0.5e-6);
    EXPECT_DOUBLE_EQ(*cfg.experiment.b_max, 2e-6);
    EXPECT_EQ(cfg.experiment.seed, 12345678901234u);
    EXPECT_EQ(cfg.experiment.pulse_count(Protocol::kCpmg), 16u);
    EXPECT_EQ(cfg.experiment.pulse_count(Protocol::kCxy8), 72u);
    EXPECT_DOUBLE_EQ(*cfg.analysis.eta_anchor, 9e-9);
    EXPECT_NEAR(cfg.analysis.effective_sigma(), 1.0 / std::sqrt(0.02 * 5e5), 1e-15);
    EXPECT_EQ(cfg.analysis.slope_method, SlopeMethod::kFiniteDifference);
    EXPECT_EQ(cfg.analysis.contrast_model, ContrastModelKind::kExponential);
}

TEST(config, automatic_field_range) {
    const RunConfig cfg = parse(R"({"experiment": {"b_min_ut": 1, "b_range_periods": 3}})");
    const double lambda = ideal_oscillation_period(72, 1e5, cfg.setup.constants);
    EXPECT_NEAR(cfg.experiment.b_max_for(72, 1e5, cfg.setup.constants), 1e-6 + 3 * lambda, 1e-18);
}

TEST(config, unknown_keys) {
    const std::string text = R"({"experiment": {"n": 8, "frequency": 3}, "extra": {}})";
    EXPECT_EQ(category_of([&] { parse(text, true); }), ErrorCategory::kConfig);
    std::vector<std::string> warnings;
    parse_run_config(json::parse(text), false, &warnings);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("experiment.frequency"), std::string::npos);
    EXPECT_NE(warnings[0].find("extra"), std::string::npos);
}

TEST(config, rejects_bad_values) {
    EXPECT_EQ(category_of([] { parse(R"({"experiment": {"n": "72"}})"); }), ErrorCategory::kConfig);
    EXPECT_EQ(category_of([] { parse(R"({"experiment": {"n": 0}})"); }), ErrorCategory::kConfig);
    EXPECT_EQ(category_of([] { parse(R"({"experiment": {"protocols": ["KDD"]}})"); }), ErrorCategory::kConfig);
    EXPECT_EQ(category_of([] { parse(R"({"experiment": {"level": -1}})"); }), ErrorCategory::kInvalidArgument);
    EXPECT_EQ(category_of([] { parse(R"({"experiment": {"b_min_ut": 2, "b_max_ut": 1}})"); }), ErrorCategory::kConfig);
    EXPECT_EQ(category_of([] { parse(R"({"experiment": {"temperature_mode": "hot"}})"); }), ErrorCategory::kConfig);
    EXPECT_EQ(category_of([] { parse(R"({"errors": {"angle_error": 1.5}})"); }), ErrorCategory::kConfig);
    EXPECT_EQ(category_of([] { parse(R"({"errors": {"hyperfine_lines": [{"offset_mhz": 0, "weight": 0.4}]}})"); }),
              ErrorCategory::kConfig);
    EXPECT_EQ(category_of([] { parse(R"({"sample": {"stretch_exponent": 4}})"); }), ErrorCategory::kConfig);
    EXPECT_EQ(category_of([] { parse(R"({"analysis": {"workers": 0}})"); }), ErrorCategory::kConfig);
    EXPECT_EQ(category_of([] { parse(R"({"analysis": {"sigma_model": "magic"}})"); }), ErrorCategory::kConfig);
    EXPECT_EQ(category_of([] { parse(R"([1, 2])"); }), ErrorCategory::kConfig);
}

TEST(config, resolved_json_round_trips) {
    const RunConfig cfg = parse(R"({"experiment": {"protocols": ["CPMG", "XY8"], "f_ac_khz": [10, 250], "seed": 9},
                                    "sample": {"t1_cryo_ms": 1e4}, "analysis": {"eta_anchor_nt": 9}})");
    const json resolved = to_json(cfg);
    const RunConfig again = parse_run_config(resolved, true);
    EXPECT_EQ(to_json(again), resolved);
    EXPECT_EQ(resolved["errors"]["angle_error"], 0.01);
    EXPECT_TRUE(to_json(parse("{}"))["sample"]["t1_cryo_ms"].is_null());
    EXPECT_TRUE(to_json(parse("{}"))["experiment"]["b_max_ut"].is_null());
}

TEST(config, unit_conversions_are_lossless) {
    // whatever a config file says must survive emit -> parse bit for bit
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        json doc = {
            {"sample", {{"t1_ms", 1 + 9 * u(rng)}, {"t1_cryo_ms", 1e3 * u(rng) + 1}, {"t2_hahn_us", 100 + 900 * u(rng)}}},
            {"errors",
             {{"rabi_frequency_mhz", 1 + 20 * u(rng)},
              {"hyperfine_lines", {{{"offset_mhz", -3 * u(rng)}, {"weight", 0.5}}, {{"offset_mhz", 3 * u(rng)}, {"weight", 0.5}}}}}},
            {"experiment", {{"f_ac_khz", {1 + 500 * u(rng)}}, {"b_min_ut", u(rng)}, {"b_max_ut", 1 + 10 * u(rng)}}},
            {"analysis", {{"eta_anchor_nt", 1 + 20 * u(rng)}}},
        };
        const RunConfig cfg = parse_run_config(doc, true);
        const RunConfig back = parse_run_config(to_json(cfg), true);
        EXPECT_EQ(to_json(back), to_json(cfg));
        EXPECT_EQ(back.setup.coherence.t1, cfg.setup.coherence.t1);
        EXPECT_EQ(back.setup.coherence.t1_cryo, cfg.setup.coherence.t1_cryo);
        EXPECT_EQ(back.setup.coherence.t2_hahn, cfg.setup.coherence.t2_hahn);
        EXPECT_EQ(back.setup.errors.rabi_frequency, cfg.setup.errors.rabi_frequency);
        EXPECT_EQ(back.setup.hyperfine.lines[0].offset, cfg.setup.hyperfine.lines[0].offset);
        EXPECT_EQ(back.experiment.f_ac, cfg.experiment.f_ac);
        EXPECT_EQ(back.experiment.b_min, cfg.experiment.b_min);
        EXPECT_EQ(back.experiment.b_max, cfg.experiment.b_max);
        EXPECT_EQ(back.analysis.eta_anchor, cfg.analysis.eta_anchor);
    }
}

TEST(config, load_from_file) {
    const auto dir = std::filesystem::temp_directory_path() / "ddmag_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "ok.json") << R"({"experiment": {"n": 48}})";
        std::ofstream(dir / "broken.json") << R"({"experiment": {"n": 48)";
    }
    EXPECT_EQ(load_run_config(dir / "ok.json", true).experiment.n, 48u);
    EXPECT_EQ(category_of([&] { load_run_config(dir / "broken.json", true); }), ErrorCategory::kConfig);
    EXPECT_EQ(category_of([&] { load_run_config(dir / "missing.json", true); }), ErrorCategory::kIo);
    std::filesystem::remove_all(dir);
}

TEST(config, contrast_model_factory) {
    RunConfig cfg = parse(R"({"analysis": {"contrast_model": "constant", "contrast_c0": 0.5}})");
    EXPECT_EQ(make_contrast_model(cfg)->contrast(Protocol::kXy8, 8, 1e4), 0.5);
    cfg = parse(R"({"analysis": {"contrast_model": "exponential", "contrast_n_c": 10}})");
    EXPECT_NEAR(make_contrast_model(cfg)->contrast(Protocol::kXy8, 10, 1e4), std::exp(-1.0), 1e-15);
    cfg = parse("{}");
    const double c = make_contrast_model(cfg)->contrast(Protocol::kXy8, 48, 25e3);
    EXPECT_GT(c, 0.5);
    EXPECT_LT(c, 1.0);
}
