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

#include "ddmag/seqgen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ddmag/error.hpp"

using namespace ddmag;

namespace {

std::vector<double> phases(const PulseSequence& s) {
    std::vector<double> out;
    for (const auto& p : s.pulses) out.push_back(p.phase_axis);
    return out;
}

const std::vector<double> kXy8Block = {kPhaseX, kPhaseY, kPhaseX, kPhaseY, kPhaseY, kPhaseX, kPhaseY, kPhaseX};

ErrorCategory category_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.category();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCategory::kIo;
}

}  // namespace

TEST(seqgen, cpmg_examples) {
    auto one = build_cpmg(1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.pulses[0].phase_axis, kPhaseY);
    EXPECT_EQ(phases(build_cpmg(8)), std::vector<double>(8, kPhaseY));
    EXPECT_EQ(category_of([] { build_cpmg(0); }), ErrorCategory::kInvalidArgument);
}

TEST(seqgen, xy8_blocks) {
    EXPECT_EQ(phases(build_xy8(1)), kXy8Block);
    EXPECT_EQ(build_xy8(6).size(), 48u);
    auto s = build_xy8(18);
    ASSERT_EQ(s.size(), 144u);
    for (std::size_t b = 0; b < 18; ++b) {
        for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(s.pulses[8 * b + k].phase_axis, kXy8Block[k]) << b << "," << k;
    }
    EXPECT_EQ(category_of([] { build_xy8(0); }), ErrorCategory::kInvalidArgument);
}

TEST(seqgen, cxy8_counts) {
    // n(l) = 8 n(l-1) + 8, n(0) = 8
    const std::size_t expected[] = {8, 72, 584, 4680};
    for (int l = 0; l < 4; ++l) {
        EXPECT_EQ(cxy8_pulse_count(l), expected[l]);
        EXPECT_EQ(build_cxy8(l).size(), expected[l]);
        if (l > 0) EXPECT_EQ(build_cxy8(l).size(), 8 * build_cxy8(l - 1).size() + 8);
    }
    EXPECT_EQ(phases(build_cxy8(0)), kXy8Block);
    EXPECT_EQ(build_cxy8(2).concat_level, 2);
}

TEST(seqgen, cxy8_structure) {
    // each skeleton slot holds a full inner copy followed by one skeleton pulse
    auto inner = build_cxy8(0);
    auto outer = build_cxy8(1);
    for (std::size_t slot = 0; slot < 8; ++slot) {
        for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(outer.pulses[9 * slot + k], inner.pulses[k]);
        EXPECT_EQ(outer.pulses[9 * slot + 8].phase_axis, kXy8Block[slot]);
    }
    // shifted inheritance rotates inner copies but keeps the count
    auto shifted = build_cxy8(1, PhaseInheritance::kShifted);
    EXPECT_EQ(shifted.size(), 72u);
    EXPECT_NE(phases(shifted), phases(outer));
    for (const auto& p : shifted.pulses) {
        EXPECT_GE(p.phase_axis, 0.0);
        EXPECT_LT(p.phase_axis, 2 * std::numbers::pi);
    }
}

TEST(seqgen, cxy8_limits) {
    EXPECT_EQ(category_of([] { build_cxy8(4, PhaseInheritance::kAbsolute, 1000); }), ErrorCategory::kResourceLimit);
    EXPECT_EQ(category_of([] { build_cxy8(6); }), ErrorCategory::kResourceLimit);
    EXPECT_EQ(category_of([] { build_cxy8(-1); }), ErrorCategory::kInvalidArgument);
    EXPECT_EQ(build_cxy8(4).size(), 37448u);
}

TEST(seqgen, build_sequence_admissible) {
    EXPECT_EQ(build_sequence(Protocol::kXy8, 48).size(), 48u);
    EXPECT_EQ(build_sequence(Protocol::kCxy8, 584).concat_level, 2);
    EXPECT_EQ(category_of([] { build_sequence(Protocol::kXy8, 12); }), ErrorCategory::kInvalidArgument);
    EXPECT_EQ(category_of([] { build_sequence(Protocol::kCxy8, 80); }), ErrorCategory::kInvalidArgument);
    EXPECT_EQ(admissible_pulse_counts(Protocol::kCxy8, 600), (std::vector<std::size_t>{8, 72, 584}));
    EXPECT_EQ(admissible_pulse_counts(Protocol::kXy8, 30), (std::vector<std::size_t>{8, 16, 24}));
    EXPECT_EQ(admissible_pulse_counts(Protocol::kCpmg, 5).size(), 5u);
}

TEST(seqgen, protocol_names) {
    for (auto p : {Protocol::kCpmg, Protocol::kXy8, Protocol::kCxy8}) EXPECT_EQ(parse_protocol(protocol_name(p)), p);
    EXPECT_EQ(parse_protocol("xy8"), Protocol::kXy8);
    EXPECT_EQ(category_of([] { parse_protocol("KDD"); }), ErrorCategory::kInvalidArgument);
}

TEST(seqgen, synchronize_examples) {
    auto a = synchronize(build_xy8(6), 100e3);
    EXPECT_NEAR(a.spacing(), 5e-6, 1e-18);
    EXPECT_NEAR(a.total_time, 0.24e-3, 1e-15);
    auto b = synchronize(build_xy8(6), 10e3);
    EXPECT_NEAR(b.total_time, 2.4e-3, 1e-15);
    EXPECT_EQ(category_of([] { synchronize(build_cpmg(4), 1.0, 1.0); }), ErrorCategory::kInvalidTiming);
    EXPECT_EQ(category_of([] { synchronize(build_cpmg(4), 0.0); }), ErrorCategory::kInvalidArgument);
}

TEST(seqgen, synchronize_grid_is_symmetric) {
    for (std::size_t n : {1, 2, 7, 48, 584}) {
        for (double f : {1e3, 33e3, 250e3}) {
            auto ts = synchronize(build_cpmg(n), f);
            ASSERT_EQ(ts.size(), n);
            EXPECT_DOUBLE_EQ(ts.total_time, n / (2 * f));
            for (std::size_t k = 0; k < n; ++k) {
                EXPECT_DOUBLE_EQ(ts.pulse_times[k], (2.0 * (k + 1) - 1) / (4 * f));
                EXPECT_NEAR(ts.pulse_times[k] + ts.pulse_times[n - 1 - k], ts.total_time, 1e-15 * ts.total_time);
                if (k > 0) {
                    const double gap = ts.pulse_times[k] - ts.pulse_times[k - 1];
                    EXPECT_LE(std::abs(gap - 0.5 / f), 4 * std::numeric_limits<double>::epsilon() * ts.total_time);
                }
            }
            EXPECT_GT(ts.pulse_times.front(), 0.0);
            EXPECT_LT(ts.pulse_times.back(), ts.total_time);
        }
    }
}

TEST(seqgen, toggling_sign) {
    auto two = synchronize(build_cpmg(2), 1e4);
    EXPECT_EQ(toggling_sign(two, 1e-12), 1);
    EXPECT_EQ(toggling_sign(two, two.pulse_times[0] + 1e-9), -1);
    auto eight = synchronize(build_xy8(1), 1e4);
    EXPECT_EQ(toggling_sign(eight, eight.total_time - 1e-12), 1);
    EXPECT_EQ(toggling_sign(eight, 0.0), 1);
    EXPECT_EQ(category_of([&] { toggling_sign(eight, -1e-9); }), ErrorCategory::kInvalidArgument);
    EXPECT_EQ(category_of([&] { toggling_sign(eight, eight.total_time * 1.01); }), ErrorCategory::kInvalidArgument);
    EXPECT_EQ(category_of([&] { toggling_sign(eight, eight.pulse_times[3]); }), ErrorCategory::kInvalidArgument);
}

TEST(seqgen, toggling_sign_refocuses_static_field) {
    // piecewise-constant s(t): integrate exactly over the intervals between centers
    for (std::size_t n : {2, 8, 48, 72}) {
        auto ts = synchronize(build_cpmg(n), 2.5e4);
        std::vector<double> edges = {0.0};
        edges.insert(edges.end(), ts.pulse_times.begin(), ts.pulse_times.end());
        edges.push_back(ts.total_time);
        double integral = 0.0;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            integral += toggling_sign(ts, 0.5 * (edges[i] + edges[i + 1])) * (edges[i + 1] - edges[i]);
        }
        EXPECT_NEAR(integral, 0.0, 1e-15 * n * ts.total_time);  // rounding grows with the interval count
    }
}

TEST(seqgen, timing_table) {
    auto ts = synchronize(build_xy8(1), 1e5);
    std::ostringstream out;
    write_timing_table(out, ts);
    std::istringstream in(out.str());
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream cols(line);
        std::size_t index;
        double t, phase, angle;
        ASSERT_TRUE(cols >> index >> t >> phase >> angle) << line;
        EXPECT_EQ(index, rows);
        EXPECT_EQ(t, ts.pulse_times[rows - 1]);  // 17 digits round-trip exactly
        EXPECT_EQ(phase, kXy8Block[rows - 1]);
        EXPECT_EQ(angle, std::numbers::pi);
        EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 3);
    }
    EXPECT_EQ(rows, 8u);
}

TEST(seqgen, pulse_invariants) {
    EXPECT_NEAR(make_pulse(-std::numbers::pi / 2).phase_axis, 1.5 * std::numbers::pi, 1e-15);
    EXPECT_NEAR(make_pulse(5 * std::numbers::pi).phase_axis, std::numbers::pi, 1e-12);
    EXPECT_EQ(category_of([] { make_pulse(0.0, 0.0); }), ErrorCategory::kInvalidArgument);
    EXPECT_EQ(category_of([] { make_pulse(0.0, 2 * std::numbers::pi); }), ErrorCategory::kInvalidArgument);
}
