#pragma once

/// \file ctxcalc/svg.hpp
///
/// Minimal deterministic SVG line charts: linear axes with ticks, one
/// polyline per series, legend and axis labels.

#include <ctxcalc/errors.hpp>
#include <ctxcalc/sweep.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace ctxcalc {

struct chart_series
{
    std::string name;
    std::vector<double> values;
};

struct line_chart
{
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x;
    std::vector<chart_series> series;
};

namespace detail {

inline std::string svg_num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

inline std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

/// 1-2-5 tick step giving roughly `target` intervals over [lo, hi].
inline double nice_step(double lo, double hi, int target = 5)
{
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double f = norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0;
    return f * mag;
}

struct axis_range
{
    double lo;
    double hi;
    double step;
};

inline axis_range make_axis(double lo, double hi)
{
    if (!(hi > lo))
    {
        const double pad = std::abs(lo) > 0.0 ? std::abs(lo) * 0.1 : 1.0;
        lo -= pad;
        hi += pad;
    }
    const double step = nice_step(lo, hi);
    return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

} // namespace detail

inline std::string render_svg(const line_chart& chart)
{
    constexpr double width = 720, height = 480;
    constexpr double left = 80, right = 180, top = 50, bottom = 70;
    constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
    constexpr std::array<const char*, 8> palette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    if (chart.x.empty())
    {
        throw config_error("chart needs at least one x value");
    }
    double ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : chart.series)
    {
        if (s.values.size() != chart.x.size())
        {
            throw config_error("chart series '" + s.name + "' length does not match x");
        }
        for (double v : s.values)
        {
            if (std::isfinite(v))
            {
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
        }
    }
    if (!std::isfinite(ymin))
    {
        ymin = 0.0;
        ymax = 1.0;
    }
    const auto xa = detail::make_axis(*std::min_element(chart.x.begin(), chart.x.end()),
                                      *std::max_element(chart.x.begin(), chart.x.end()));
    const auto ya = detail::make_axis(std::min(ymin, 0.0), ymax);
    auto px = [&](double x) { return left + (x - xa.lo) / (xa.hi - xa.lo) * plot_w; };
    auto py = [&](double y) { return top + plot_h - (y - ya.lo) / (ya.hi - ya.lo) * plot_h; };
    using detail::svg_num;

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(width) + "\" height=\""
           + svg_num(height) + "\" viewBox=\"0 0 " + svg_num(width) + " " + svg_num(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + svg_num(left + plot_w / 2) + "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + detail::xml_escape(chart.title) + "</text>\n";

    // Grid and ticks.
    out += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    const int nx = static_cast<int>(std::lround((xa.hi - xa.lo) / xa.step));
    for (int k = 0; k <= nx; ++k)
    {
        const double v = xa.lo + k * xa.step;
        out += "<line x1=\"" + svg_num(px(v)) + "\" y1=\"" + svg_num(top) + "\" x2=\"" + svg_num(px(v)) + "\" y2=\""
               + svg_num(top + plot_h) + "\" stroke=\"#e0e0e0\"/>\n";
        out += "<text x=\"" + svg_num(px(v)) + "\" y=\"" + svg_num(top + plot_h + 18)
               + "\" text-anchor=\"middle\">" + detail::tick_label(v) + "</text>\n";
    }
    const int ny = static_cast<int>(std::lround((ya.hi - ya.lo) / ya.step));
    for (int k = 0; k <= ny; ++k)
    {
        const double v = ya.lo + k * ya.step;
        out += "<line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(py(v)) + "\" x2=\"" + svg_num(left + plot_w)
               + "\" y2=\"" + svg_num(py(v)) + "\" stroke=\"#e0e0e0\"/>\n";
        out += "<text x=\"" + svg_num(left - 8) + "\" y=\"" + svg_num(py(v) + 4) + "\" text-anchor=\"end\">"
               + detail::tick_label(v) + "</text>\n";
    }
    out += "</g>\n";

    // Axes and labels.
    out += "<rect x=\"" + svg_num(left) + "\" y=\"" + svg_num(top) + "\" width=\"" + svg_num(plot_w)
           + "\" height=\"" + svg_num(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";
    out += "<text x=\"" + svg_num(left + plot_w / 2) + "\" y=\"" + svg_num(height - 22)
           + "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
           + detail::xml_escape(chart.x_label) + "</text>\n";
    out += "<text x=\"20\" y=\"" + svg_num(top + plot_h / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 20 " + svg_num(top + plot_h / 2) + ")\">"
           + detail::xml_escape(chart.y_label) + "</text>\n";

    for (std::size_t s = 0; s < chart.series.size(); ++s)
    {
        const auto* color = palette[s % palette.size()];
        std::string points;
        for (std::size_t k = 0; k < chart.x.size(); ++k)
        {
            const double v = chart.series[s].values[k];
            if (!std::isfinite(v))
            {
                continue;
            }
            points += (points.empty() ? "" : " ") + svg_num(px(chart.x[k])) + "," + svg_num(py(v));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + points
               + "\"/>\n";

        const double ly = top + 12 + 20.0 * static_cast<double>(s);
        const double lx = left + plot_w + 16;
        out += "<line x1=\"" + svg_num(lx) + "\" y1=\"" + svg_num(ly) + "\" x2=\"" + svg_num(lx + 24) + "\" y2=\""
               + svg_num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + svg_num(lx + 30) + "\" y=\"" + svg_num(ly + 4)
               + "\" font-family=\"sans-serif\" font-size=\"12\">" + detail::xml_escape(chart.series[s].name)
               + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

/// One series per table column against the swept parameter.
inline line_chart chart_from_table(const sweep_table& table, std::string title)
{
    line_chart chart;
    chart.title = std::move(title);
    chart.x_label = std::string(to_string(table.parameter));
    chart.y_label = "value";
    for (const auto& r : table.rows)
    {
        chart.x.push_back(r.value);
    }
    for (auto c : table.columns)
    {
        chart.series.push_back({std::string(to_string(c)), table.column(to_string(c))});
    }
    return chart;
}

} // namespace ctxcalc
