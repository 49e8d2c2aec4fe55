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

// Dynamical-decoupling pulse sequences (CPMG, XY8, concatenated XY8) and
// their synchronization to an AC field.

#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace ddmag {

inline constexpr double kPhaseX = 0.0;
inline constexpr double kPhaseY = std::numbers::pi / 2.0;

inline constexpr std::size_t kDefaultPulseCap = 100000;

/// A rotation about an equatorial axis of the Bloch sphere.
struct Pulse {
    double phase_axis = kPhaseX;          // radians, normalized to [0, 2pi)
    double nominal_angle = std::numbers::pi;  // radians, in (0, 2pi)

    bool operator==(const Pulse&) const = default;
};

/// Validates and normalizes the phase. Throws invalid-argument on a bad angle.
Pulse make_pulse(double phase_axis, double nominal_angle = std::numbers::pi);

enum class Protocol { kCpmg, kXy8, kCxy8 };

std::string_view protocol_name(Protocol protocol);
Protocol parse_protocol(std::string_view name);

/// How embedded copies pick up their phases under concatenation.
enum class PhaseInheritance {
    kAbsolute,  // inner copies keep their own phases
    kShifted,   // inner copies are rotated by the phase of the skeleton pulse that closes them
};

struct PulseSequence {
    std::vector<Pulse> pulses;  // pi-pulses only; the bracketing pi/2 pulses are implicit
    Protocol protocol = Protocol::kCpmg;
    int concat_level = 0;

    std::size_t size() const { return pulses.size(); }
};

PulseSequence build_cpmg(std::size_t n);
PulseSequence build_xy8(std::size_t repeats);

/// Level 0 is plain XY8. Level l places a full level l-1 sequence before each
/// of the 8 skeleton pulses, so n(l) = 8 n(l-1) + 8.
PulseSequence build_cxy8(int level, PhaseInheritance inheritance = PhaseInheritance::kAbsolute,
                         std::size_t pulse_cap = kDefaultPulseCap);

/// Pulse count of build_cxy8(level) without building it.
std::size_t cxy8_pulse_count(int level);

/// Builds the protocol's sequence with exactly n pulses. XY8 requires a
/// multiple of 8, CXY8 one of the recursion counts {8, 72, 584, ...}.
PulseSequence build_sequence(Protocol protocol, std::size_t n,
                             PhaseInheritance inheritance = PhaseInheritance::kAbsolute);

/// Pulse counts a protocol can realize, in increasing order, up to n_max.
std::vector<std::size_t> admissible_pulse_counts(Protocol protocol, std::size_t n_max);

struct TimedSequence {
    PulseSequence base;
    std::vector<double> pulse_times;  // pulse centers, seconds
    double total_time = 0.0;
    double sync_frequency = 0.0;  // hertz
    double pulse_duration = 0.0;  // seconds, 0 means instantaneous

    std::size_t size() const { return pulse_times.size(); }
    /// Nominal center-to-center spacing 1/(2 f).
    double spacing() const { return 0.5 / sync_frequency; }
};

/// Centers pulse k (1-indexed) at (2k-1)/(4 f); total time n/(2 f).
TimedSequence synchronize(PulseSequence seq, double f_ac, double pulse_duration = 0.0);

/// Toggling-frame sign: +1 before the first pulse, flipping at each pulse center.
int toggling_sign(const TimedSequence& ts, double t);

/// Tab-separated table: index (1-based), time_s, phase_rad, angle_rad; one row per pulse, no header.
void write_timing_table(std::ostream& out, const TimedSequence& ts);

}  // namespace ddmag
