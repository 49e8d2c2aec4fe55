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

#include "ddmag/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "ddmag/error.hpp"

namespace ddmag {

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string sweep_csv(std::span<const SignalCurve> curves) {
    std::string out = "b_ac_tesla,contrast,contrast_stderr,protocol,n,f_ac_hz,temperature_mode\n";
    for (const auto& curve : curves) {
        const std::string suffix = "," + std::string(protocol_name(curve.meta.protocol)) + "," +
                                   std::to_string(curve.meta.n) + "," + format_number(curve.meta.f_ac) + "," +
                                   std::string(temperature_name(curve.meta.temperature)) + "\n";
        for (const auto& p : curve.points) {
            out += format_number(p.b_ac) + "," + format_number(p.contrast) + "," + format_number(p.contrast_stderr) +
                   suffix;
        }
    }
    return out;
}

std::string sensitivity_csv(std::span<const SensitivityReport> reports) {
    std::string out = "protocol,n,f_ac_hz,temperature_mode,slope_per_tesla,sigma,total_time_s,eta_t_per_sqrt_hz\n";
    for (const auto& r : reports) {
        out += std::string(protocol_name(r.protocol)) + "," + std::to_string(r.n) + "," + format_number(r.f_ac) + "," +
               std::string(temperature_name(r.temperature)) + "," + format_number(r.slope) + "," +
               format_number(r.sigma) + "," + format_number(r.total_time) + "," + format_number(r.eta) + "\n";
    }
    return out;
}

std::vector<SignalCurve> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("b_ac_tesla,", 0) != 0) {
        fail(ErrorCategory::kInvalidArgument, "not a sweep CSV (missing header)");
    }
    std::vector<SignalCurve> curves;
    std::string last_key;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
        if (cells.size() != 7) fail(ErrorCategory::kInvalidArgument, "sweep CSV row needs 7 columns: " + line);
        const std::string key = cells[3] + "," + cells[4] + "," + cells[5] + "," + cells[6];
        if (curves.empty() || key != last_key) {
            SignalCurve c;
            c.meta.protocol = parse_protocol(cells[3]);
            c.meta.n = std::stoul(cells[4]);
            c.meta.f_ac = std::stod(cells[5]);
            c.meta.temperature = parse_temperature(cells[6]);
            curves.push_back(std::move(c));
            last_key = key;
        }
        curves.back().points.push_back({std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2])});
    }
    return curves;
}

nlohmann::json to_json(const SignalCurve& curve) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : curve.points) points.push_back({p.b_ac, p.contrast, p.contrast_stderr});
    return {{"protocol", protocol_name(curve.meta.protocol)},
            {"n", curve.meta.n},
            {"f_ac_hz", curve.meta.f_ac},
            {"temperature_mode", temperature_name(curve.meta.temperature)},
            {"seed", curve.meta.seed},
            {"points_b_contrast_stderr", points}};
}

nlohmann::json to_json(const SensitivityReport& r) {
    return {{"protocol", protocol_name(r.protocol)},
            {"n", r.n},
            {"f_ac_hz", r.f_ac},
            {"temperature_mode", temperature_name(r.temperature)},
            {"slope_per_tesla", r.slope},
            {"sigma", r.sigma},
            {"total_time_s", r.total_time},
            {"eta_t_per_sqrt_hz", r.eta}};
}

nlohmann::json to_json(const SinusoidFit& fit) {
    return {{"amplitude", fit.amplitude},
            {"period_tesla", fit.period},
            {"phase_rad", fit.phase},
            {"offset", fit.offset},
            {"rms_residual", fit.rms_residual},
            {"max_slope_per_tesla", fit.max_slope()}};
}

nlohmann::json make_report(const nlohmann::json& config, const nlohmann::json& results, std::uint64_t seed) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return {{"schema_version", kReportSchemaVersion},
            {"config", config},
            {"results", results},
            {"provenance", {{"seed", seed}, {"version", kVersion}, {"timestamp", stamp}}}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCategory::kIo, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) fail(ErrorCategory::kIo, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorCategory::kIo, "cannot replace " + path.string());
    }
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace

std::string render_svg(std::span<const PlotSeries> series, const std::string& x_label, const std::string& y_label) {
    constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 20, kTop = 20, kBottom = 50;
    double x_min = INFINITY, x_max = -INFINITY, y_min = INFINITY, y_max = -INFINITY;
    for (const auto& s : series) {
        for (double v : s.x) x_min = std::min(x_min, v), x_max = std::max(x_max, v);
        for (double v : s.y) y_min = std::min(y_min, v), y_max = std::max(y_max, v);
    }
    if (!(x_min < x_max)) x_min -= 0.5, x_max += 0.5;
    if (!(y_min < y_max)) y_min -= 0.5, y_max += 0.5;
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_min + (x_max - x_min) * i / 4.0;
        const double yv = y_min + (y_max - y_min) * i / 4.0;
        svg << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(kHeight - kBottom + 16)
            << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
        svg << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(py(yv) + 4) << "\" text-anchor=\"end\">"
            << tick_label(yv) << "</text>\n";
    }
    svg << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"" << fmt(kHeight - 10)
        << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
    svg << "<text transform=\"translate(16," << fmt(kTop + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape_xml(y_label) << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % std::size(kPalette)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < s.x.size(); ++k) svg << fmt(px(s.x[k])) << "," << fmt(py(s.y[k])) << " ";
        svg << "\"/>\n";
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            svg << "<circle cx=\"" << fmt(px(s.x[k])) << "\" cy=\"" << fmt(py(s.y[k])) << "\" r=\"2\" fill=\""
                << color << "\"/>\n";
        }
        if (s.has_slope_line) {
            const double half = 0.12 * (x_max - x_min);
            const double x0 = std::max(x_min, s.slope_x - half);
            const double x1 = std::min(x_max, s.slope_x + half);
            svg << "<line x1=\"" << fmt(px(x0)) << "\" y1=\"" << fmt(py(s.slope_y + s.slope * (x0 - s.slope_x)))
                << "\" x2=\"" << fmt(px(x1)) << "\" y2=\"" << fmt(py(s.slope_y + s.slope * (x1 - s.slope_x)))
                << "\" stroke=\"" << color << "\" stroke-dasharray=\"5,3\" stroke-width=\"2\"/>\n";
        }
        svg << "<text x=\"" << fmt(kLeft + 10) << "\" y=\"" << fmt(kTop + 16 + 14 * i) << "\" fill=\"" << color
            << "\">" << escape_xml(s.label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

PlotSeries curve_series(const SignalCurve& curve, double x_scale) {
    PlotSeries s;
    s.label = std::string(protocol_name(curve.meta.protocol)) + " n=" + std::to_string(curve.meta.n) + " f=" +
              tick_label(curve.meta.f_ac / 1e3) + " kHz " + std::string(temperature_name(curve.meta.temperature));
    for (const auto& p : curve.points) {
        s.x.push_back(p.b_ac * x_scale);
        s.y.push_back(p.contrast);
    }
    if (curve.points.size() >= 8 && !curve.degenerate()) {
        try {
            const SinusoidFit fit = fit_curve(curve);
            // steepest point of the fitted sinusoid nearest the start of the sweep
            const double two_pi = 2.0 * std::numbers::pi;
            const double b0 = curve.points.front().b_ac;
            double k = std::ceil((two_pi * b0 / fit.period + fit.phase) / std::numbers::pi);
            const double b_star = (k * std::numbers::pi - fit.phase) * fit.period / two_pi;
            const double derivative = fit.amplitude * two_pi / fit.period * std::cos(two_pi * b_star / fit.period + fit.phase);
            s.has_slope_line = true;
            s.slope_x = b_star * x_scale;
            s.slope_y = fit(b_star);
            s.slope = derivative / x_scale;
        } catch (const Error&) {
            s.has_slope_line = false;
        }
    }
    return s;
}

}  // namespace ddmag
