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

#include <cmath>
#include <fstream>
#include <set>

#include "ddmag/error.hpp"

namespace ddmag {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& message) { fail(ErrorCategory::kConfig, message); }

// Config files use unit-suffixed keys; the library works in SI.
struct Unit {
    double factor;
    bool divide;  // SI = value / factor (sub-units) rather than value * factor
};
constexpr Unit kMilli{1e3, true}, kMicro{1e6, true}, kNano{1e9, true}, kKilo{1e3, false}, kMega{1e6, false};

double to_si(double value, Unit u) { return u.divide ? value / u.factor : value * u.factor; }

// Inverse of to_si that survives a round trip bit for bit: the naive
// quotient can land an ulp or two away from a value that maps back exactly.
double from_si(double si, Unit u) {
    const double guess = u.divide ? si * u.factor : si / u.factor;
    if (!std::isfinite(guess) || to_si(guess, u) == si) return guess;
    double up = guess, down = guess;
    for (int step = 0; step < 8; ++step) {
        up = std::nextafter(up, INFINITY);
        down = std::nextafter(down, -INFINITY);
        if (to_si(up, u) == si) return up;
        if (to_si(down, u) == si) return down;
    }
    return guess;
}

// Reads keys from one JSON object and remembers which ones were consumed.
class Block {
   public:
    Block(const json& doc, std::string name) : name_(std::move(name)) {
        if (doc.is_null()) {
            obj_ = json::object();
        } else if (!doc.is_object()) {
            config_error("'" + name_ + "' must be an object");
        } else {
            obj_ = doc;
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key) && !obj_.at(key).is_null();
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_number()) config_error(path(key) + " must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) config_error(path(key) + " must be finite");
        return d;
    }

    double quantity(const std::string& key, Unit unit, double fallback_si) {
        return has(key) ? to_si(number(key, 0.0), unit) : fallback_si;
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key, 0.0);
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) config_error(path(key) + " must be an integer");
        return v.get<std::int64_t>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_number_unsigned()) config_error(path(key) + " must be a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_boolean()) config_error(path(key) + " must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_string()) config_error(path(key) + " must be a string");
        return v.get<std::string>();
    }

    std::string path(const std::string& key) const { return name_ + "." + key; }

    void unknown_keys(std::vector<std::string>& out) const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.contains(key)) out.push_back(path(key));
        }
    }

   private:
    json obj_;
    std::string name_;
    std::set<std::string> seen_;
};

std::vector<double> number_list(Block& block, const std::string& key) {
    const json& v = block.raw(key);
    std::vector<double> out;
    auto push = [&](const json& item) {
        if (!item.is_number()) config_error(block.path(key) + " must hold numbers");
        out.push_back(item.get<double>());
    };
    if (v.is_array()) {
        for (const auto& item : v) push(item);
    } else {
        push(v);
    }
    if (out.empty()) config_error(block.path(key) + " must not be empty");
    return out;
}

template <typename Fn>
auto translate(const std::string& where, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.category() == ErrorCategory::kConfig) throw;
        config_error(where + ": " + e.what());
    }
}

std::string inheritance_name(PhaseInheritance p) {
    return p == PhaseInheritance::kAbsolute ? "absolute" : "shifted";
}

std::string sigma_model_name(SigmaModel m) { return m == SigmaModel::kDirect ? "direct" : "shot-noise"; }

std::string contrast_model_name(ContrastModelKind k) {
    switch (k) {
        case ContrastModelKind::kMonteCarlo:
            return "monte-carlo";
        case ContrastModelKind::kExponential:
            return "exponential";
        case ContrastModelKind::kConstant:
            return "constant";
    }
    return "?";
}

std::string slope_method_name(SlopeMethod m) { return m == SlopeMethod::kFit ? "fit" : "finite-difference"; }

json nullable(std::optional<double> v, Unit unit) {
    if (!v) return nullptr;
    return from_si(*v, unit);
}

}  // namespace

std::size_t ExperimentConfig::pulse_count(Protocol protocol) const {
    if (protocol == Protocol::kCxy8 && level) return cxy8_pulse_count(*level);
    return n;
}

double ExperimentConfig::b_max_for(std::size_t pulses, double f, const PhysicalConstants& constants) const {
    if (b_max) return *b_max;
    return b_min + b_range_periods * ideal_oscillation_period(pulses, f, constants);
}

double AnalysisConfig::effective_sigma() const {
    return sigma_model == SigmaModel::kDirect ? sigma : shot_noise_sigma(photons_per_shot, repeats);
}

void RunConfig::validate() const {
    translate("sample/errors", [&] {
        setup.validate();
        return 0;
    });
    const auto& e = experiment;
    if (e.protocols.empty()) config_error("experiment.protocols must not be empty");
    if (e.level && *e.level < 0) fail(ErrorCategory::kInvalidArgument, "experiment.level must be nonnegative");
    if (!e.level && e.n == 0) config_error("experiment.n must be positive");
    for (double f : e.f_ac) {
        if (!(f > 0.0)) config_error("experiment.f_ac_khz entries must be positive");
    }
    if (e.points < 8) config_error("experiment.points must be at least 8");
    if (e.b_max && *e.b_max < e.b_min) config_error("experiment.b_max_ut must be >= b_min_ut");
    if (!(e.b_range_periods >= 0.0)) config_error("experiment.b_range_periods must be >= 0");
    const auto& a = analysis;
    if (!(a.sigma > 0.0)) config_error("analysis.sigma must be positive");
    if (!(a.photons_per_shot > 0.0 && a.repeats > 0.0)) config_error("analysis shot-noise inputs must be positive");
    if (!(a.total_time > 0.0)) config_error("analysis.total_time_s must be positive");
    if (a.eta_anchor && !(*a.eta_anchor > 0.0)) config_error("analysis.eta_anchor_nt must be positive");
    if (!(a.contrast_c0 > 0.0 && a.contrast_c0 <= 1.0 && a.contrast_n_c > 0.0)) {
        config_error("analysis contrast model parameters out of range");
    }
    if (a.contrast_points < 8) config_error("analysis.contrast_points must be at least 8");
    if (a.workers < 1) config_error("analysis.workers must be at least 1");
    if (a.output_dir.empty()) config_error("analysis.output_dir must not be empty");
}

RunConfig parse_run_config(const json& doc, bool strict, std::vector<std::string>* warnings) {
    if (!doc.is_object()) config_error("configuration must be a JSON object");
    RunConfig cfg;
    std::vector<std::string> unknown;
    const std::set<std::string> blocks = {"sample", "errors", "experiment", "analysis"};
    for (const auto& [key, value] : doc.items()) {
        if (!blocks.contains(key)) unknown.push_back(key);
    }
    auto sub = [&](const char* name) { return doc.contains(name) ? doc.at(name) : json(); };

    // sample
    Block sample(sub("sample"), "sample");
    CoherenceParams& cp = cfg.setup.coherence;
    cp.t1 = sample.quantity("t1_ms", kMilli, cp.t1);
    if (auto t1c = sample.optional_number("t1_cryo_ms")) cp.t1_cryo = to_si(*t1c, kMilli);
    sample.has("t1_cryo_ms");
    cp.t2_hahn = sample.quantity("t2_hahn_us", kMicro, cp.t2_hahn);
    cp.scaling_exponent = sample.number("scaling_exponent", cp.scaling_exponent);
    cp.stretch_exponent = sample.number("stretch_exponent", cp.stretch_exponent);
    cp.t1_coupling = sample.number("t1_coupling", cp.t1_coupling);
    cfg.setup.constants.g_factor = sample.number("g_factor", cfg.setup.constants.g_factor);
    sample.unknown_keys(unknown);

    // errors
    Block errors(sub("errors"), "errors");
    PulseErrorModel& em = cfg.setup.errors;
    em.angle_error = errors.number("angle_error", em.angle_error);
    em.phase_error = errors.number("phase_error_rad", em.phase_error);
    em.rabi_frequency = errors.quantity("rabi_frequency_mhz", kMega, em.rabi_frequency);
    em.angle_jitter = errors.number("angle_jitter", em.angle_jitter);
    em.phase_jitter = errors.number("phase_jitter_rad", em.phase_jitter);
    em.angle_error_enabled = errors.boolean("angle_error_enabled", em.angle_error_enabled);
    em.phase_error_enabled = errors.boolean("phase_error_enabled", em.phase_error_enabled);
    em.off_resonance_enabled = errors.boolean("off_resonance_enabled", em.off_resonance_enabled);
    em.finite_duration_enabled = errors.boolean("finite_duration_enabled", em.finite_duration_enabled);
    em.jitter_enabled = errors.boolean("jitter_enabled", em.jitter_enabled);
    em.detuned_free_precession = errors.boolean("detuned_free_precession", em.detuned_free_precession);
    const std::int64_t realizations = errors.integer("realizations", cfg.setup.realizations);
    if (realizations < 1 || realizations > 1'000'000) config_error("errors.realizations must be in [1, 1e6]");
    cfg.setup.realizations = static_cast<int>(realizations);
    if (errors.has("hyperfine_lines")) {
        const json& lines = errors.raw("hyperfine_lines");
        if (!lines.is_array()) config_error("errors.hyperfine_lines must be an array");
        cfg.setup.hyperfine.lines.clear();
        for (const auto& line : lines) {
            Block lb(line, "errors.hyperfine_lines[]");
            HyperfineLine hl;
            hl.offset = lb.quantity("offset_mhz", kMega, 0.0);
            hl.weight = lb.number("weight", 1.0);
            lb.unknown_keys(unknown);
            cfg.setup.hyperfine.lines.push_back(hl);
        }
    }
    errors.unknown_keys(unknown);

    // experiment
    Block exp(sub("experiment"), "experiment");
    ExperimentConfig& ec = cfg.experiment;
    if (exp.has("protocols")) {
        const json& v = exp.raw("protocols");
        ec.protocols.clear();
        auto push = [&](const json& item) {
            if (!item.is_string()) config_error("experiment.protocols must hold strings");
            ec.protocols.push_back(translate("experiment.protocols", [&] { return parse_protocol(item.get<std::string>()); }));
        };
        if (v.is_array()) {
            for (const auto& item : v) push(item);
        } else {
            push(v);
        }
    }
    const std::int64_t n = exp.integer("n", static_cast<std::int64_t>(ec.n));
    if (n < 1) config_error("experiment.n must be positive");
    ec.n = static_cast<std::size_t>(n);
    if (exp.has("level")) ec.level = static_cast<int>(exp.integer("level", 0));
    if (exp.has("f_ac_khz")) {
        ec.f_ac = number_list(exp, "f_ac_khz");
        for (double& f : ec.f_ac) f = to_si(f, kKilo);
    }
    ec.b_min = exp.quantity("b_min_ut", kMicro, ec.b_min);
    if (auto b = exp.optional_number("b_max_ut")) ec.b_max = to_si(*b, kMicro);
    ec.b_range_periods = exp.number("b_range_periods", ec.b_range_periods);
    const std::int64_t points = exp.integer("points", static_cast<std::int64_t>(ec.points));
    if (points < 1) config_error("experiment.points must be positive");
    ec.points = static_cast<std::size_t>(points);
    ec.seed = exp.unsigned_integer("seed", ec.seed);
    cfg.setup.temperature = translate("experiment.temperature_mode", [&] {
        return parse_temperature(exp.string("temperature_mode", std::string(temperature_name(cfg.setup.temperature))));
    });
    const std::string inherit = exp.string("phase_inheritance", inheritance_name(cfg.setup.inheritance));
    if (inherit == "absolute") {
        cfg.setup.inheritance = PhaseInheritance::kAbsolute;
    } else if (inherit == "shifted") {
        cfg.setup.inheritance = PhaseInheritance::kShifted;
    } else {
        config_error("experiment.phase_inheritance must be 'absolute' or 'shifted'");
    }
    cfg.setup.apply_envelope = exp.boolean("apply_envelope", cfg.setup.apply_envelope);
    exp.unknown_keys(unknown);

    // analysis
    Block an(sub("analysis"), "analysis");
    AnalysisConfig& ac = cfg.analysis;
    const std::string sm = an.string("sigma_model", sigma_model_name(ac.sigma_model));
    if (sm == "direct") {
        ac.sigma_model = SigmaModel::kDirect;
    } else if (sm == "shot-noise") {
        ac.sigma_model = SigmaModel::kShotNoise;
    } else {
        config_error("analysis.sigma_model must be 'direct' or 'shot-noise'");
    }
    ac.sigma = an.number("sigma", ac.sigma);
    ac.photons_per_shot = an.number("photons_per_shot", ac.photons_per_shot);
    ac.repeats = an.number("repeats", ac.repeats);
    ac.total_time = an.number("total_time_s", ac.total_time);
    if (auto anchor = an.optional_number("eta_anchor_nt")) ac.eta_anchor = to_si(*anchor, kNano);
    const std::int64_t n_max = an.integer("n_max", static_cast<std::int64_t>(ac.n_max));
    if (n_max < 0) config_error("analysis.n_max must be nonnegative");
    ac.n_max = static_cast<std::size_t>(n_max);
    const std::string cm = an.string("contrast_model", contrast_model_name(ac.contrast_model));
    if (cm == "monte-carlo") {
        ac.contrast_model = ContrastModelKind::kMonteCarlo;
    } else if (cm == "exponential") {
        ac.contrast_model = ContrastModelKind::kExponential;
    } else if (cm == "constant") {
        ac.contrast_model = ContrastModelKind::kConstant;
    } else {
        config_error("analysis.contrast_model must be 'monte-carlo', 'exponential' or 'constant'");
    }
    ac.contrast_c0 = an.number("contrast_c0", ac.contrast_c0);
    ac.contrast_n_c = an.number("contrast_n_c", ac.contrast_n_c);
    const std::int64_t cpoints = an.integer("contrast_points", static_cast<std::int64_t>(ac.contrast_points));
    if (cpoints < 1) config_error("analysis.contrast_points must be positive");
    ac.contrast_points = static_cast<std::size_t>(cpoints);
    const std::string slope = an.string("slope_method", slope_method_name(ac.slope_method));
    if (slope == "fit") {
        ac.slope_method = SlopeMethod::kFit;
    } else if (slope == "finite-difference") {
        ac.slope_method = SlopeMethod::kFiniteDifference;
    } else {
        config_error("analysis.slope_method must be 'fit' or 'finite-difference'");
    }
    ac.output_dir = an.string("output_dir", ac.output_dir);
    ac.plot = an.boolean("plot", ac.plot);
    ac.workers = static_cast<int>(an.integer("workers", ac.workers));
    an.unknown_keys(unknown);

    if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
        if (strict) config_error("unknown configuration keys: " + list);
        if (warnings) warnings->push_back("ignoring unknown configuration keys: " + list);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, bool strict, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::kIo, "cannot read configuration " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        config_error("malformed configuration " + path.string() + ": " + e.what());
    }
    return parse_run_config(doc, strict, warnings);
}

json to_json(const RunConfig& cfg) {
    const auto& cp = cfg.setup.coherence;
    const auto& em = cfg.setup.errors;
    const auto& ec = cfg.experiment;
    const auto& ac = cfg.analysis;

    json lines = json::array();
    for (const auto& l : cfg.setup.hyperfine.lines) lines.push_back({{"offset_mhz", from_si(l.offset, kMega)}, {"weight", l.weight}});
    json protocols = json::array();
    for (Protocol p : ec.protocols) protocols.push_back(protocol_name(p));
    json freqs = json::array();
    for (double f : ec.f_ac) freqs.push_back(from_si(f, kKilo));

    return {
        {"sample",
         {{"t1_ms", from_si(cp.t1, kMilli)},
          {"t1_cryo_ms", std::isfinite(cp.t1_cryo) ? json(from_si(cp.t1_cryo, kMilli)) : json(nullptr)},
          {"t2_hahn_us", from_si(cp.t2_hahn, kMicro)},
          {"scaling_exponent", cp.scaling_exponent},
          {"stretch_exponent", cp.stretch_exponent},
          {"t1_coupling", cp.t1_coupling},
          {"g_factor", cfg.setup.constants.g_factor}}},
        {"errors",
         {{"angle_error", em.angle_error},
          {"phase_error_rad", em.phase_error},
          {"rabi_frequency_mhz", from_si(em.rabi_frequency, kMega)},
          {"angle_jitter", em.angle_jitter},
          {"phase_jitter_rad", em.phase_jitter},
          {"angle_error_enabled", em.angle_error_enabled},
          {"phase_error_enabled", em.phase_error_enabled},
          {"off_resonance_enabled", em.off_resonance_enabled},
          {"finite_duration_enabled", em.finite_duration_enabled},
          {"jitter_enabled", em.jitter_enabled},
          {"detuned_free_precession", em.detuned_free_precession},
          {"realizations", cfg.setup.realizations},
          {"hyperfine_lines", lines}}},
        {"experiment",
         {{"protocols", protocols},
          {"n", ec.n},
          {"level", ec.level ? json(*ec.level) : json(nullptr)},
          {"f_ac_khz", freqs},
          {"b_min_ut", from_si(ec.b_min, kMicro)},
          {"b_max_ut", nullable(ec.b_max, kMicro)},
          {"b_range_periods", ec.b_range_periods},
          {"points", ec.points},
          {"seed", ec.seed},
          {"temperature_mode", temperature_name(cfg.setup.temperature)},
          {"phase_inheritance", inheritance_name(cfg.setup.inheritance)},
          {"apply_envelope", cfg.setup.apply_envelope}}},
        {"analysis",
         {{"sigma_model", sigma_model_name(ac.sigma_model)},
          {"sigma", ac.sigma},
          {"photons_per_shot", ac.photons_per_shot},
          {"repeats", ac.repeats},
          {"total_time_s", ac.total_time},
          {"eta_anchor_nt", nullable(ac.eta_anchor, kNano)},
          {"n_max", ac.n_max},
          {"contrast_model", contrast_model_name(ac.contrast_model)},
          {"contrast_c0", ac.contrast_c0},
          {"contrast_n_c", ac.contrast_n_c},
          {"contrast_points", ac.contrast_points},
          {"slope_method", slope_method_name(ac.slope_method)},
          {"output_dir", ac.output_dir},
          {"plot", ac.plot},
          {"workers", ac.workers}}},
    };
}

std::unique_ptr<ContrastModel> make_contrast_model(const RunConfig& cfg) {
    switch (cfg.analysis.contrast_model) {
        case ContrastModelKind::kMonteCarlo: {
            MonteCarloContrast::Options options;
            options.points = cfg.analysis.contrast_points;
            options.seed = cfg.experiment.seed;
            return std::make_unique<MonteCarloContrast>(cfg.setup, options);
        }
        case ContrastModelKind::kExponential:
            return std::make_unique<ExponentialContrast>(cfg.analysis.contrast_c0, cfg.analysis.contrast_n_c);
        case ContrastModelKind::kConstant:
            return std::make_unique<ConstantContrast>(cfg.analysis.contrast_c0);
    }
    return nullptr;
}

}  // namespace ddmag
