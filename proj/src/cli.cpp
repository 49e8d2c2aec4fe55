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

#include "ddmag/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "ddmag/config.hpp"
#include "ddmag/io.hpp"
#include "ddmag/magnetometry.hpp"
#include "ddmag/seqgen.hpp"

namespace ddmag {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool plot = false;
    std::optional<int> workers;
    bool strict = false;
};

struct Context {
    RunConfig config;
    fs::path out;
    std::ostream& out_stream;
    std::ostream& err_stream;

    std::uint64_t seed() const { return config.experiment.seed; }
    int workers() const { return config.analysis.workers; }

    void emit(const std::string& name, const std::string& content) const {
        const fs::path path = out / name;
        write_file_atomic(path, content);
        out_stream << "wrote " << path.string() << "\n";
    }

    void emit_report(const std::string& name, const json& results) const {
        emit(name, make_report(to_json(config), results, seed()).dump(2) + "\n");
    }

    void warn(const std::string& message) const { err_stream << "warning: " << message << "\n"; }
};

std::string khz_tag(double f_ac) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%gkHz", f_ac * 1e-3);
    return buf;
}

double pulse_duration_for(const SimulationSetup& setup) { return setup.errors.pulse_duration(std::numbers::pi); }

// All (protocol, frequency) combinations of the experiment block, in config order.
template <typename Fn>
void for_each_case(const Context& ctx, Fn&& fn) {
    for (Protocol p : ctx.config.experiment.protocols) {
        for (double f : ctx.config.experiment.f_ac) fn(p, ctx.config.experiment.pulse_count(p), f);
    }
}

SweepRequest request_for(const Context& ctx, Protocol p, std::size_t n, double f) {
    const auto& e = ctx.config.experiment;
    SweepRequest r;
    r.protocol = p;
    r.n = n;
    r.f_ac = f;
    r.b_min = e.b_min;
    r.b_max = e.b_max_for(n, f, ctx.config.setup.constants);
    r.points = e.points;
    return r;
}

std::vector<SignalCurve> run_sweeps(const Context& ctx) {
    std::vector<SignalCurve> curves;
    for_each_case(ctx, [&](Protocol p, std::size_t n, double f) {
        curves.push_back(sweep_amplitude(request_for(ctx, p, n, f), ctx.config.setup, ctx.seed(), ctx.workers()));
        if (curves.back().degenerate()) {
            ctx.warn("degenerate sweep for " + std::string(protocol_name(p)) + " n=" + std::to_string(n) +
                     ": field range is empty, all contrasts are equal");
        }
    });
    return curves;
}

void maybe_plot(const Context& ctx, const std::string& name, const std::vector<SignalCurve>& curves) {
    if (!ctx.config.analysis.plot) return;
    // plots are a convenience; a failure here must not affect the tables already written
    try {
        std::vector<PlotSeries> series;
        for (const auto& c : curves) series.push_back(curve_series(c));
        ctx.emit(name, render_svg(series, "B_AC (uT)", "contrast"));
    } catch (const std::exception& e) {
        ctx.warn(std::string("plot skipped: ") + e.what());
    }
}

int cmd_sequence(const Context& ctx) {
    for_each_case(ctx, [&](Protocol p, std::size_t n, double f) {
        const PulseSequence seq = build_sequence(p, n, ctx.config.setup.inheritance);
        const TimedSequence ts = synchronize(seq, f, pulse_duration_for(ctx.config.setup));
        std::ostringstream table;
        write_timing_table(table, ts);
        ctx.emit("sequence_" + std::string(protocol_name(p)) + "_n" + std::to_string(n) + "_" + khz_tag(f) + ".tsv",
                 table.str());
    });
    return 0;
}

int cmd_sweep(const Context& ctx) {
    const std::vector<SignalCurve> curves = run_sweeps(ctx);
    ctx.emit("sweep.csv", sweep_csv(curves));
    json results = json::array();
    for (const auto& c : curves) results.push_back(to_json(c));
    ctx.emit_report("sweep.json", {{"curves", results}});
    maybe_plot(ctx, "sweep.svg", curves);
    return 0;
}

json diagnostics(const SignalCurve& curve, const Error& e) {
    json d = {{"category", category_name(e.category())}, {"message", e.what()}, {"curve", to_json(curve)}};
    if (const auto* fe = dynamic_cast<const FitError*>(&e)) {
        d["rms_residual"] = fe->rms_residual();
        d["amplitude"] = fe->amplitude();
        d["period"] = fe->period();
    }
    return d;
}

int cmd_sensitivity(const Context& ctx) {
    const auto& a = ctx.config.analysis;
    const std::vector<SignalCurve> curves = run_sweeps(ctx);
    ctx.emit("sweep.csv", sweep_csv(curves));

    std::vector<double> slopes;
    for (const auto& c : curves) {
        try {
            slopes.push_back(fit_max_slope(c, a.slope_method));
        } catch (const Error& e) {
            ctx.emit("sensitivity_diagnostics.json", diagnostics(c, e).dump(2) + "\n");
            throw;
        }
    }

    double sigma = a.effective_sigma();
    json calibration = nullptr;
    if (a.eta_anchor) {
        // pick sigma so the first curve lands exactly on the anchor
        sigma = *a.eta_anchor * slopes.front() / std::sqrt(a.total_time);
        calibration = {{"eta_anchor_t_per_sqrt_hz", *a.eta_anchor}, {"sigma", sigma}};
    }
    std::vector<SensitivityReport> reports;
    json results = json::array();
    for (std::size_t i = 0; i < curves.size(); ++i) {
        reports.push_back(make_sensitivity_report(slopes[i], sigma, a.total_time, curves[i].meta));
        results.push_back(to_json(reports.back()));
    }
    ctx.emit("sensitivity.csv", sensitivity_csv(reports));
    ctx.emit_report("sensitivity.json", {{"reports", results}, {"calibration", calibration}});
    maybe_plot(ctx, "sensitivity.svg", curves);
    return 0;
}

int cmd_optimize(const Context& ctx) {
    const auto& cfg = ctx.config;
    const auto contrast = make_contrast_model(cfg);
    std::ostringstream csv;
    csv << "protocol,f_ac_hz,temperature_mode,n_opt,contrast,eta_opt_t_per_sqrt_hz\n";
    json results = json::array();
    for (Protocol p : cfg.experiment.protocols) {
        for (double f : cfg.experiment.f_ac) {
            const PulseOptimum opt = optimize_pulse_number(p, f, cfg.setup.coherence, cfg.setup.temperature, *contrast,
                                                           cfg.setup.constants, cfg.analysis.n_max, ctx.workers());
            double c_opt = 0.0;
            json scan = json::array();
            for (const auto& s : opt.scan) {
                if (s.n == opt.n_opt) c_opt = s.contrast;
                scan.push_back({{"n", s.n}, {"contrast", s.contrast},
                                {"eta_t_per_sqrt_hz", std::isfinite(s.eta) ? json(s.eta) : json(nullptr)}});
            }
            csv << protocol_name(p) << ',' << format_number(f) << ',' << temperature_name(cfg.setup.temperature) << ','
                << opt.n_opt << ',' << format_number(c_opt) << ',' << format_number(opt.eta_opt) << '\n';
            results.push_back({{"protocol", protocol_name(p)},
                               {"f_ac_hz", f},
                               {"n_opt", opt.n_opt},
                               {"contrast", c_opt},
                               {"eta_opt_t_per_sqrt_hz", opt.eta_opt},
                               {"scan", scan}});
        }
    }
    ctx.emit("optimize.csv", csv.str());
    ctx.emit_report("optimize.json", {{"optima", results}});
    return 0;
}

int cmd_compare_temp(const Context& ctx) {
    std::ostringstream csv;
    csv << "protocol,n,f_ac_hz,slope_room_per_tesla,slope_cryo_per_tesla,ratio_cryo_over_room\n";
    json results = json::array();
    std::vector<SignalCurve> curves;
    for_each_case(ctx, [&](Protocol p, std::size_t n, double f) {
        const SweepRequest r = request_for(ctx, p, n, f);
        TemperatureComparison t;
        try {
            t = compare_temperatures(r, ctx.config.setup, ctx.seed(), ctx.workers(), ctx.config.analysis.slope_method);
        } catch (const Error& e) {
            const json d = {{"category", category_name(e.category())},
                            {"message", e.what()},
                            {"protocol", protocol_name(p)},
                            {"n", n},
                            {"f_ac_hz", f}};
            ctx.emit("compare_temp_diagnostics.json", d.dump(2) + "\n");
            throw;
        }
        csv << protocol_name(p) << ',' << n << ',' << format_number(f) << ',' << format_number(t.slope_room) << ','
            << format_number(t.slope_cryo) << ',' << format_number(t.ratio) << '\n';
        results.push_back({{"protocol", protocol_name(p)},
                           {"n", n},
                           {"f_ac_hz", f},
                           {"slope_room_per_tesla", t.slope_room},
                           {"slope_cryo_per_tesla", t.slope_cryo},
                           {"ratio_cryo_over_room", t.ratio},
                           {"room", to_json(t.room)},
                           {"cryo", to_json(t.cryo)}});
        curves.push_back(std::move(t.room));
        curves.push_back(std::move(t.cryo));
    });
    ctx.emit("compare_temp.csv", csv.str());
    ctx.emit_report("compare_temp.json", {{"comparisons", results}});
    maybe_plot(ctx, "compare_temp.svg", curves);
    return 0;
}

RunConfig resolve_config(const Overrides& o, std::ostream& err) {
    std::vector<std::string> warnings;
    RunConfig cfg = o.config_path.empty() ? parse_run_config(json::object(), o.strict, &warnings)
                                          : load_run_config(o.config_path, o.strict, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    if (o.seed) cfg.experiment.seed = *o.seed;
    if (o.out_dir) cfg.analysis.output_dir = *o.out_dir;
    if (o.plot) cfg.analysis.plot = true;
    if (o.workers) cfg.analysis.workers = *o.workers;
    cfg.validate();
    return cfg;
}

}  // namespace

int exit_code(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::kFitFailure:
        case ErrorCategory::kNoSignal:
            return 3;
        case ErrorCategory::kIo:
            return 4;
        default:
            return 2;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"ddmag: dynamical-decoupling AC magnetometry simulator"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1, 1);

    Overrides o;
    std::uint64_t seed = 0;
    std::string out_dir;
    int workers = 1;
    app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides experiment.seed)");
    auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides analysis.output_dir)");
    app.add_flag("--plot", o.plot, "also write SVG plots");
    auto* workers_opt = app.add_option("--workers", workers, "worker threads")->check(CLI::Range(1, 1024));
    app.add_flag("--strict", o.strict, "reject unknown configuration keys");

    using Command = std::function<int(const Context&)>;
    std::vector<std::pair<CLI::App*, Command>> commands = {
        {app.add_subcommand("sequence", "write pulse timing tables"), cmd_sequence},
        {app.add_subcommand("sweep", "contrast vs field amplitude sweeps"), cmd_sweep},
        {app.add_subcommand("sensitivity", "sensitivity from the steepest slope of each sweep"), cmd_sensitivity},
        {app.add_subcommand("optimize", "optimal pulse number per frequency"), cmd_optimize},
        {app.add_subcommand("compare-temp", "room vs cryogenic slope comparison"), cmd_compare_temp},
    };
    for (auto& [sub, fn] : commands) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;  // --help/--version succeed; every usage error is 1
    }
    if (*seed_opt) o.seed = seed;
    if (*out_opt) o.out_dir = out_dir;
    if (*workers_opt) o.workers = workers;

    try {
        Context ctx{resolve_config(o, err), {}, out, err};
        ctx.out = ctx.config.analysis.output_dir;
        for (auto& [sub, fn] : commands) {
            if (sub->parsed()) return fn(ctx);
        }
        return 1;
    } catch (const Error& e) {
        err << "error[" << category_name(e.category()) << "]: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        err << "error[internal]: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ddmag
