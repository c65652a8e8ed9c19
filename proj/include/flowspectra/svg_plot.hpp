#pragma once

#include "flowspectra/io.hpp"

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace flowspectra {

struct PlotAnnotation {
    bool truncated = false;
    std::string reason;
};

namespace detail {

inline std::string svg_num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

inline std::string svg_label(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline std::string svg_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Series {
    std::string name;
    std::string color;
    const std::vector<double>* values;
};

inline void svg_panel(std::ostringstream& out, const std::string& title, const std::vector<double>& t,
                      const std::vector<Series>& series, double top, double t_min, double t_max,
                      const PlotAnnotation& note)
{
    constexpr double left = 80.0;
    constexpr double width = 600.0;
    constexpr double height = 180.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : series) {
        for (double y : *s.values) {
            if (std::isfinite(y)) {
                lo = std::min(lo, y);
                hi = std::max(hi, y);
            }
        }
    }
    out << "<g>\n";
    out << "<rect x=\"" << svg_num(left) << "\" y=\"" << svg_num(top) << "\" width=\"" << svg_num(width)
        << "\" height=\"" << svg_num(height) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << svg_num(left) << "\" y=\"" << svg_num(top - 8.0) << "\" font-size=\"13\">"
        << svg_escape(title) << "</text>\n";
    if (!std::isfinite(lo)) {
        out << "<text x=\"" << svg_num(left + 10.0) << "\" y=\"" << svg_num(top + height / 2.0)
            << "\" font-size=\"12\" fill=\"#888\">no data</text>\n</g>\n";
        return;
    }
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
        // Flat series: centre it in a band of +-1% (or +-1 around zero).
        const double pad = std::abs(hi) > 0.0 ? 0.01 * std::abs(hi) : 1.0;
        lo -= pad;
        hi += pad;
    }
    const double t_span = t_max > t_min ? t_max - t_min : 1.0;
    auto px = [&](double x) { return left + width * (x - t_min) / t_span; };
    auto py = [&](double y) { return top + height * (1.0 - (y - lo) / (hi - lo)); };

    out << "<text x=\"" << svg_num(left - 6.0) << "\" y=\"" << svg_num(top + 10.0)
        << "\" font-size=\"10\" text-anchor=\"end\">" << svg_label(hi) << "</text>\n";
    out << "<text x=\"" << svg_num(left - 6.0) << "\" y=\"" << svg_num(top + height)
        << "\" font-size=\"10\" text-anchor=\"end\">" << svg_label(lo) << "</text>\n";
    out << "<text x=\"" << svg_num(left) << "\" y=\"" << svg_num(top + height + 14.0)
        << "\" font-size=\"10\">" << svg_label(t_min) << "</text>\n";
    out << "<text x=\"" << svg_num(left + width) << "\" y=\"" << svg_num(top + height + 14.0)
        << "\" font-size=\"10\" text-anchor=\"end\">t = " << svg_label(t_max) << "</text>\n";

    double legend_x = left + width - 10.0;
    for (auto it = series.rbegin(); it != series.rend(); ++it) {
        out << "<text x=\"" << svg_num(legend_x) << "\" y=\"" << svg_num(top - 8.0)
            << "\" font-size=\"11\" text-anchor=\"end\" fill=\"" << it->color << "\">"
            << svg_escape(it->name) << "</text>\n";
        legend_x -= 12.0 + 7.0 * static_cast<double>(it->name.size());
    }
    for (const auto& s : series) {
        std::string points;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double y = (*s.values)[i];
            if (std::isfinite(y) && std::isfinite(t[i])) {
                points += svg_num(px(t[i])) + "," + svg_num(py(y)) + " ";
            }
        }
        if (!points.empty()) {
            points.pop_back();
            out << "<polyline fill=\"none\" stroke=\"" << s.color
                << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
        }
    }
    if (note.truncated) {
        const double x = px(t_max);
        out << "<line class=\"truncation\" x1=\"" << svg_num(x) << "\" y1=\"" << svg_num(top)
            << "\" x2=\"" << svg_num(x) << "\" y2=\"" << svg_num(top + height)
            << "\" stroke=\"#c00\" stroke-dasharray=\"4 3\"/>\n";
    }
    out << "</g>\n";
}

} // namespace detail

inline const std::vector<std::string>& plot_columns()
{
    static const std::vector<std::string> cols = {"t", "lambda", "q_up", "q_down", "H_min", "H_max"};
    return cols;
}

/// Three stacked panels: lambda, Q_up / Q_down and H_min / H_max against t.
/// Output depends only on the table and the annotation.
inline std::string render_trace_svg(const TraceTable& table, const PlotAnnotation& note = {})
{
    std::vector<std::string> missing;
    for (const auto& c : plot_columns()) {
        if (!table.columns.count(c)) {
            missing.push_back(c);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) {
            list += (list.empty() ? "" : ", ") + m;
        }
        throw Error("trace is missing columns: " + list);
    }
    const auto& t = table.column("t");
    double t_min = std::numeric_limits<double>::infinity();
    double t_max = -t_min;
    for (double x : t) {
        if (std::isfinite(x)) {
            t_min = std::min(t_min, x);
            t_max = std::max(t_max, x);
        }
    }
    if (!std::isfinite(t_min)) {
        t_min = 0.0;
        t_max = 1.0;
    }

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"760\" "
           "viewBox=\"0 0 720 760\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"720\" height=\"760\" fill=\"white\"/>\n";
    detail::svg_panel(out, "first eigenvalue", t, {{"lambda", "#1f4e99", &table.column("lambda")}},
                      40.0, t_min, t_max, note);
    detail::svg_panel(out, "monotone quantities", t,
                      {{"Q_up", "#2a8a3e", &table.column("q_up")},
                       {"Q_down", "#b3541e", &table.column("q_down")}},
                      280.0, t_min, t_max, note);
    detail::svg_panel(out, "mean curvature range", t,
                      {{"H_min", "#6a3d9a", &table.column("H_min")},
                       {"H_max", "#c0392b", &table.column("H_max")}},
                      520.0, t_min, t_max, note);
    if (note.truncated) {
        out << "<text class=\"truncation\" x=\"680\" y=\"745\" font-size=\"12\" text-anchor=\"end\" "
               "fill=\"#c00\">truncated: "
            << detail::svg_escape(note.reason) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace flowspectra
