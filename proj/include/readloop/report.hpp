#pragma once

// Results persistence, markdown tables and SVG plots.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "readloop/experiment.hpp"

namespace readloop {

namespace detail {

inline std::string fmt(double v, int precision = 3) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

inline double num(const json& j) { return j.is_number() ? j.get<double>() : std::nan(""); }

inline std::string svg_header(int w, int h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " +
           std::to_string(w) + " " + std::to_string(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" + "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace detail

/// Adaptive minus control deltas with 95% CI whiskers, one bar per metric.
inline std::string deltas_svg(const json& results) {
    using detail::fmt;
    const auto& comps = results.at("comparisons");
    const int w = 480, h = 320, left = 70, right = 20, top = 40, bottom = 50;
    double lo = 0.0, hi = 0.0;
    for (const auto& c : comps) {
        lo = std::min({lo, detail::num(c.at("ci95")[0]), detail::num(c.at("delta"))});
        hi = std::max({hi, detail::num(c.at("ci95")[1]), detail::num(c.at("delta"))});
    }
    if (hi - lo < 1e-9) {
        lo -= 0.05;
        hi += 0.05;
    }
    const double pad = 0.1 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto y = [&](double v) { return top + (hi - v) / (hi - lo) * (h - top - bottom); };
    std::string s = detail::svg_header(w, h);
    s += "<text x=\"" + std::to_string(w / 2) + "\" y=\"20\" text-anchor=\"middle\">" + results.value("subject_id", std::string()) +
         ": adaptive - control</text>\n";
    s += "<line x1=\"" + std::to_string(left) + "\" x2=\"" + std::to_string(w - right) + "\" y1=\"" + fmt(y(0.0), 2) + "\" y2=\"" + fmt(y(0.0), 2) +
         "\" stroke=\"black\"/>\n";
    for (double t : {lo + pad, 0.5 * (lo + hi), hi - pad})
        s += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + fmt(y(t) + 4, 2) + "\" text-anchor=\"end\">" + fmt(t) + "</text>\n";
    const std::size_t n = comps.size();
    const double slot = n ? static_cast<double>(w - left - right) / static_cast<double>(n) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = comps[i];
        const double d = detail::num(c.at("delta"));
        const double x = left + slot * (static_cast<double>(i) + 0.5);
        const double bw = slot * 0.4;
        const double y0 = y(0.0), y1 = y(d);
        s += "<rect x=\"" + fmt(x - bw / 2, 2) + "\" y=\"" + fmt(std::min(y0, y1), 2) + "\" width=\"" + fmt(bw, 2) + "\" height=\"" +
             fmt(std::abs(y1 - y0), 2) + "\" fill=\"#4c78a8\"/>\n";
        const double cl = y(detail::num(c.at("ci95")[0])), ch = y(detail::num(c.at("ci95")[1]));
        s += "<line x1=\"" + fmt(x, 2) + "\" x2=\"" + fmt(x, 2) + "\" y1=\"" + fmt(cl, 2) + "\" y2=\"" + fmt(ch, 2) + "\" stroke=\"black\"/>\n";
        for (double yy : {cl, ch})
            s += "<line x1=\"" + fmt(x - 6, 2) + "\" x2=\"" + fmt(x + 6, 2) + "\" y1=\"" + fmt(yy, 2) + "\" y2=\"" + fmt(yy, 2) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fmt(x, 2) + "\" y=\"" + std::to_string(h - bottom + 20) + "\" text-anchor=\"middle\">" + c.at("metric").get<std::string>() +
             " (" + fmt(d) + ")</text>\n";
    }
    s += "</svg>\n";
    return s;
}

/// Per-cycle accuracy, one line per condition.
inline std::string cycle_accuracy_svg(const json& results) {
    using detail::fmt;
    const int w = 480, h = 320, left = 60, right = 100, top = 40, bottom = 50;
    std::map<std::string, std::vector<double>> series;
    int cycles = 0;
    for (const auto& row : results.at("per_cycle")) {
        series[row.at("condition").get<std::string>()].push_back(detail::num(row.at("accuracy")));
        cycles = std::max(cycles, row.at("cycle").get<int>());
    }
    double lo = 1.0, hi = 0.0;
    for (const auto& [name, v] : series)
        for (double a : v) {
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
    if (hi < lo) lo = 0.0, hi = 1.0;
    lo = std::max(0.0, lo - 0.05);
    hi = std::min(1.0, hi + 0.05);
    if (hi - lo < 1e-9) hi = lo + 0.1;
    auto x = [&](int c) { return cycles <= 1 ? left + (w - left - right) / 2.0 : left + (c - 1) * static_cast<double>(w - left - right) / (cycles - 1); };
    auto y = [&](double v) { return top + (hi - v) / (hi - lo) * (h - top - bottom); };
    std::string s = detail::svg_header(w, h);
    s += "<text x=\"" + std::to_string(w / 2) + "\" y=\"20\" text-anchor=\"middle\">" + results.value("subject_id", std::string()) +
         ": accuracy by cycle</text>\n";
    for (int c = 1; c <= cycles; ++c)
        s += "<text x=\"" + fmt(x(c), 2) + "\" y=\"" + std::to_string(h - bottom + 20) + "\" text-anchor=\"middle\">cycle " + std::to_string(c) + "</text>\n";
    for (double t : {lo, 0.5 * (lo + hi), hi})
        s += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + fmt(y(t) + 4, 2) + "\" text-anchor=\"end\">" + fmt(t, 2) + "</text>\n";
    const std::map<std::string, std::string> colors{{"adaptive", "#e45756"}, {"control", "#4c78a8"}};
    int legend = 0;
    for (const auto& [name, v] : series) {
        const auto it = colors.find(name);
        const std::string color = it == colors.end() ? "#555555" : it->second;
        std::string pts;
        for (std::size_t i = 0; i < v.size(); ++i) {
            pts += (i ? " " : "") + fmt(x(static_cast<int>(i) + 1), 2) + "," + fmt(y(v[i]), 2);
            s += "<circle cx=\"" + fmt(x(static_cast<int>(i) + 1), 2) + "\" cy=\"" + fmt(y(v[i]), 2) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
        }
        s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + std::to_string(w - right + 10) + "\" y=\"" + std::to_string(top + 16 * legend++) + "\" fill=\"" + color + "\">" + name + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

inline std::string report_markdown(const json& results) {
    using detail::fmt;
    std::string s = "# " + results.value("subject_id", std::string("results")) + "\n\n";
    s += "## Per-cycle outcomes\n\n| condition | cycle | accuracy | BKT gain |\n|---|---|---|---|\n";
    for (const auto& row : results.at("per_cycle"))
        s += "| " + row.at("condition").get<std::string>() + " | " + std::to_string(row.at("cycle").get<int>()) + " | " + fmt(detail::num(row.at("accuracy"))) +
             " | " + fmt(detail::num(row.at("bkt_gain"))) + " |\n";
    s += "\n## Condition summaries\n\n| condition | responses | accuracy | BKT gain | hidden mastery gain | misconception reduction |\n|---|---|---|---|---|---|\n";
    for (const auto& [name, c] : results.at("conditions").items())
        s += "| " + name + " | " + std::to_string(c.at("response_count").get<std::size_t>()) + " | " + fmt(detail::num(c.at("accuracy"))) + " | " +
             fmt(detail::num(c.at("bkt_gain"))) + " | " + fmt(detail::num(c.at("hidden_mastery_gain"))) + " | " +
             fmt(detail::num(c.at("misconception_reduction"))) + " |\n";
    s += "\n## Paired comparisons (adaptive - control)\n\n| metric | n | adaptive | control | delta | 95% CI | t | p | Wilcoxon p |\n|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& c : results.at("comparisons"))
        s += "| " + c.at("metric").get<std::string>() + " | " + std::to_string(c.at("n").get<std::size_t>()) + " | " + fmt(detail::num(c.at("adaptive_mean"))) +
             " | " + fmt(detail::num(c.at("control_mean"))) + " | " + fmt(detail::num(c.at("delta"))) + " | [" + fmt(detail::num(c.at("ci95")[0])) + ", " +
             fmt(detail::num(c.at("ci95")[1])) + "] | " + fmt(detail::num(c.at("t"))) + " | " + fmt(detail::num(c.at("p_value"))) + " | " +
             (c.contains("wilcoxon_p") ? fmt(detail::num(c.at("wilcoxon_p"))) : std::string("-")) + " |\n";
    return s;
}

/// Writes results.json, both response logs and the two plots into `dir`.
inline void write_results(const ExperimentResult& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    const json j = results_to_json(r);
    write_file(dir / "results.json", j.dump(2) + "\n");
    write_file(dir / response_log_name(Condition::adaptive), response_log(r.adaptive));
    write_file(dir / response_log_name(Condition::control), response_log(r.control));
    write_file(dir / "deltas.svg", deltas_svg(j));
    write_file(dir / "cycle_accuracy.svg", cycle_accuracy_svg(j));
}

}  // namespace readloop
