#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gyrolim {

// Minimal self-contained SVG line charts; deterministic formatting, no
// external tools. Log-scale maps through log10 with a floor.
struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

namespace detail {

inline std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline const char* series_color(std::size_t k) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return palette[k % 8];
}

} // namespace detail

inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<SvgSeries>& series, bool log_y = false) {
    if (series.empty()) throw std::runtime_error("write_line_chart: no series for " + path);
    for (const auto& s : series)
        if (s.points.empty()) throw std::runtime_error("write_line_chart: empty series for " + path);

    const double width = 640, height = 420;
    const double ml = 70, mr = 20, mt = 40, mb = 50;

    auto ymap = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, ymap(y));
            ymax = std::max(ymax, ymap(y));
        }
    if (xmax == xmin) { xmax += 1.0; xmin -= 1.0; }
    if (ymax == ymin) { ymax += 1.0; ymin -= 1.0; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (ymap(y) - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
        << "</text>\n";

    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << (mt + height - mb) / 2 << "\" font-size=\"12\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 16 " << (mt + height - mb) / 2 << ")\">" << y_label
        << (log_y ? " (log10)" : "") << "</text>\n";

    // ticks
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + k * (xmax - xmin) / 4.0;
        const double yv = ymin + k * (ymax - ymin) / 4.0;
        out << "<text x=\"" << detail::fmt6(px(xv)) << "\" y=\"" << height - mb + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << detail::fmt6(xv) << "</text>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << detail::fmt6(height - mb - k * (height - mt - mb) / 4.0 + 3)
            << "\" text-anchor=\"end\" font-size=\"10\">" << detail::fmt6(yv) << "</text>\n";
    }

    // polylines and legend
    for (std::size_t k = 0; k < series.size(); ++k) {
        out << "<polyline fill=\"none\" stroke=\"" << detail::series_color(k) << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[k].points)
            out << detail::fmt6(px(x)) << "," << detail::fmt6(py(y)) << " ";
        out << "\"/>\n";
        for (const auto& [x, y] : series[k].points)
            out << "<circle cx=\"" << detail::fmt6(px(x)) << "\" cy=\"" << detail::fmt6(py(y))
                << "\" r=\"2.5\" fill=\"" << detail::series_color(k) << "\"/>\n";
        out << "<text x=\"" << width - mr - 6 << "\" y=\"" << mt + 14 * (k + 1)
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << detail::series_color(k) << "\">"
            << series[k].name << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace gyrolim
