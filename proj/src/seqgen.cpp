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

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "ddmag/error.hpp"

namespace ddmag {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr std::array<double, 8> kXy8Phases = {kPhaseX, kPhaseY, kPhaseX, kPhaseY,
                                              kPhaseY, kPhaseX, kPhaseY, kPhaseX};

double normalize_phase(double phase) {
    double r = std::fmod(phase, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a value just below a multiple of 2pi can round to 2pi itself
    if (r >= kTwoPi) r = 0.0;
    return r;
}

void append_cxy8(std::vector<Pulse>& out, int level, PhaseInheritance inheritance, double shift) {
    for (double skeleton : kXy8Phases) {
        if (level > 0) {
            double inner_shift = shift;
            if (inheritance == PhaseInheritance::kShifted) inner_shift += skeleton;
            append_cxy8(out, level - 1, inheritance, inner_shift);
        }
        out.push_back(Pulse{normalize_phase(skeleton + shift), std::numbers::pi});
    }
}

}  // namespace

Pulse make_pulse(double phase_axis, double nominal_angle) {
    if (!std::isfinite(phase_axis) || !(nominal_angle > 0.0 && nominal_angle < kTwoPi)) {
        fail(ErrorCategory::kInvalidArgument, "pulse angle must lie in (0, 2pi) and phase must be finite");
    }
    return Pulse{normalize_phase(phase_axis), nominal_angle};
}

std::string_view protocol_name(Protocol protocol) {
    switch (protocol) {
        case Protocol::kCpmg:
            return "CPMG";
        case Protocol::kXy8:
            return "XY8";
        case Protocol::kCxy8:
            return "CXY8";
    }
    return "?";
}

Protocol parse_protocol(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "CPMG") return Protocol::kCpmg;
    if (upper == "XY8") return Protocol::kXy8;
    if (upper == "CXY8") return Protocol::kCxy8;
    fail(ErrorCategory::kInvalidArgument, "unknown protocol '" + std::string(name) + "'");
}

PulseSequence build_cpmg(std::size_t n) {
    if (n == 0) fail(ErrorCategory::kInvalidArgument, "CPMG needs at least one pulse");
    PulseSequence seq;
    seq.protocol = Protocol::kCpmg;
    seq.pulses.assign(n, Pulse{kPhaseY, std::numbers::pi});
    return seq;
}

PulseSequence build_xy8(std::size_t repeats) {
    if (repeats == 0) fail(ErrorCategory::kInvalidArgument, "XY8 needs at least one block");
    PulseSequence seq;
    seq.protocol = Protocol::kXy8;
    seq.pulses.reserve(8 * repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        for (double phase : kXy8Phases) seq.pulses.push_back(Pulse{phase, std::numbers::pi});
    }
    return seq;
}

std::size_t cxy8_pulse_count(int level) {
    if (level < 0) fail(ErrorCategory::kInvalidArgument, "concatenation level must be nonnegative");
    std::size_t n = 8;
    for (int l = 1; l <= level; ++l) {
        if (n > (std::numeric_limits<std::size_t>::max() - 8) / 8) {
            fail(ErrorCategory::kResourceLimit, "concatenation level overflows the pulse count");
        }
        n = 8 * n + 8;
    }
    return n;
}

PulseSequence build_cxy8(int level, PhaseInheritance inheritance, std::size_t pulse_cap) {
    const std::size_t n = cxy8_pulse_count(level);
    if (n > pulse_cap) {
        fail(ErrorCategory::kResourceLimit, "CXY8 level " + std::to_string(level) + " needs " +
                                                std::to_string(n) + " pulses, above the cap of " +
                                                std::to_string(pulse_cap));
    }
    PulseSequence seq;
    seq.protocol = Protocol::kCxy8;
    seq.concat_level = level;
    seq.pulses.reserve(n);
    append_cxy8(seq.pulses, level, inheritance, 0.0);
    return seq;
}

PulseSequence build_sequence(Protocol protocol, std::size_t n, PhaseInheritance inheritance) {
    switch (protocol) {
        case Protocol::kCpmg:
            return build_cpmg(n);
        case Protocol::kXy8:
            if (n == 0 || n % 8 != 0) {
                fail(ErrorCategory::kInvalidArgument, "XY8 pulse count must be a positive multiple of 8");
            }
            return build_xy8(n / 8);
        case Protocol::kCxy8:
            for (int level = 0; cxy8_pulse_count(level) <= n; ++level) {
                if (cxy8_pulse_count(level) == n) return build_cxy8(level, inheritance);
            }
            fail(ErrorCategory::kInvalidArgument,
                 "CXY8 pulse count must be one of 8, 72, 584, ... (got " + std::to_string(n) + ")");
    }
    fail(ErrorCategory::kInvalidArgument, "unknown protocol");
}

std::vector<std::size_t> admissible_pulse_counts(Protocol protocol, std::size_t n_max) {
    std::vector<std::size_t> counts;
    switch (protocol) {
        case Protocol::kCpmg:
            for (std::size_t n = 1; n <= n_max; ++n) counts.push_back(n);
            break;
        case Protocol::kXy8:
            for (std::size_t n = 8; n <= n_max; n += 8) counts.push_back(n);
            break;
        case Protocol::kCxy8:
            for (int level = 0; cxy8_pulse_count(level) <= std::min(n_max, kDefaultPulseCap); ++level) {
                counts.push_back(cxy8_pulse_count(level));
            }
            break;
    }
    return counts;
}

TimedSequence synchronize(PulseSequence seq, double f_ac, double pulse_duration) {
    if (!(f_ac > 0.0) || !std::isfinite(f_ac)) {
        fail(ErrorCategory::kInvalidArgument, "sync frequency must be positive");
    }
    if (!(pulse_duration >= 0.0)) fail(ErrorCategory::kInvalidArgument, "pulse duration must be >= 0");
    if (seq.pulses.empty()) fail(ErrorCategory::kInvalidArgument, "cannot synchronize an empty sequence");

    const double n = static_cast<double>(seq.size());
    const double total = n / (2.0 * f_ac);
    if (n * pulse_duration >= total) {
        fail(ErrorCategory::kInvalidTiming, "pulses of duration " + std::to_string(pulse_duration) +
                                                " s overlap at f_AC = " + std::to_string(f_ac) + " Hz");
    }

    TimedSequence ts;
    ts.pulse_times.reserve(seq.size());
    for (std::size_t k = 1; k <= seq.size(); ++k) {
        ts.pulse_times.push_back(static_cast<double>(2 * k - 1) / (4.0 * f_ac));
    }
    ts.base = std::move(seq);
    ts.total_time = total;
    ts.sync_frequency = f_ac;
    ts.pulse_duration = pulse_duration;
    return ts;
}

int toggling_sign(const TimedSequence& ts, double t) {
    if (!(t >= 0.0 && t <= ts.total_time)) {
        fail(ErrorCategory::kInvalidArgument, "time outside [0, total_time]");
    }
    const auto it = std::lower_bound(ts.pulse_times.begin(), ts.pulse_times.end(), t);
    if (it != ts.pulse_times.end() && *it == t) {
        fail(ErrorCategory::kInvalidArgument, "toggling sign is undefined at a pulse center");
    }
    const auto flips = static_cast<std::size_t>(it - ts.pulse_times.begin());
    return flips % 2 == 0 ? 1 : -1;
}

void write_timing_table(std::ostream& out, const TimedSequence& ts) {
    const auto old_flags = out.flags();
    const auto old_precision = out.precision();
    out << std::setprecision(17);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const Pulse& p = ts.base.pulses[i];
        out << i + 1 << '\t' << ts.pulse_times[i] << '\t' << p.phase_axis << '\t' << p.nominal_angle << '\n';
    }
    out.flags(old_flags);
    out.precision(old_precision);
}

}  // namespace ddmag
