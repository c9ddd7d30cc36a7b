#pragma once

// Static SVG chart of a forecast run: shaded interval band, actual close and
// point forecast.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ragic/error.hpp"
#include "ragic/interval.hpp"

namespace ragic {

struct PlotStyle {
    int width = 960;
    int height = 480;
    int margin_left = 80;
    int margin_right = 20;
    int margin_top = 30;
    int margin_bottom = 60;
    int x_ticks = 6;
    int y_ticks = 5;
};

namespace detail {
inline std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}
}  // namespace detail

/// One band polygon, one polyline for the actual close (days with a known
/// actual) and one polyline for the point forecast.
inline std::string render_svg(const std::vector<IntervalRecord>& rows, const PlotStyle& style = {}) {
    if (rows.empty()) fail(ErrorKind::plot, "plot: no interval rows");
    double lo = rows.front().lower;
    double hi = rows.front().upper;
    for (const auto& r : rows) {
        if (r.lower > r.upper) fail(ErrorKind::plot, "plot: lower bound above upper bound on " + r.date.iso());
        lo = std::min({lo, r.lower, r.point});
        hi = std::max({hi, r.upper, r.point});
        if (r.actual) {
            lo = std::min(lo, *r.actual);
            hi = std::max(hi, *r.actual);
        }
    }
    if (hi == lo) {
        hi += 1.0;
        lo -= 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const double x0 = style.margin_left;
    const double x1 = style.width - style.margin_right;
    const double y0 = style.margin_top;
    const double y1 = style.height - style.margin_bottom;
    const std::size_t n = rows.size();
    auto X = [&](std::size_t i) { return n == 1 ? 0.5 * (x0 + x1) : x0 + (x1 - x0) * double(i) / double(n - 1); };
    auto Y = [&](double v) { return y1 - (y1 - y0) * (v - lo) / (hi - lo); };
    auto pt = [&](std::size_t i, double v) { return detail::fmt2(X(i)) + "," + detail::fmt2(Y(v)); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << style.height
      << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height << "\" fill=\"white\"/>\n";
    s << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y1 << "\" x2=\"" << x1 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
    s << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= style.y_ticks; ++k) {
        const double v = lo + (hi - lo) * k / style.y_ticks;
        s << "<text class=\"tick\" x=\"" << x0 - 6 << "\" y=\"" << detail::fmt2(Y(v) + 4)
          << "\" font-size=\"11\" text-anchor=\"end\">" << detail::fmt2(v) << "</text>\n";
    }
    const int xt = std::min<int>(style.x_ticks, static_cast<int>(n));
    for (int k = 0; k < xt; ++k) {
        const std::size_t i = xt == 1 ? 0 : static_cast<std::size_t>(std::lround(double(k) * double(n - 1) / (xt - 1)));
        s << "<text class=\"tick\" x=\"" << detail::fmt2(X(i)) << "\" y=\"" << y1 + 18
          << "\" font-size=\"11\" text-anchor=\"middle\">" << rows[i].date.iso() << "</text>\n";
    }
    s << "<text class=\"label\" x=\"" << 0.5 * (x0 + x1) << "\" y=\"" << style.height - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">Date</text>\n";
    s << "<text class=\"label\" x=\"16\" y=\"" << 0.5 * (y0 + y1) << "\" font-size=\"13\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 16 " << 0.5 * (y0 + y1) << ")\">Price</text>\n";

    s << "<polygon class=\"band\" fill=\"#2e7d32\" fill-opacity=\"0.3\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < n; ++i) s << (i ? " " : "") << pt(i, rows[i].upper);
    for (std::size_t i = n; i-- > 0;) s << ' ' << pt(i, rows[i].lower);
    s << "\"/>\n";

    s << "<polyline class=\"actual\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (!rows[i].actual) continue;
        s << (first ? "" : " ") << pt(i, *rows[i].actual);
        first = false;
    }
    s << "\"/>\n";

    s << "<polyline class=\"point\" fill=\"none\" stroke=\"#c62828\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < n; ++i) s << (i ? " " : "") << pt(i, rows[i].point);
    s << "\"/>\n";
    s << "</svg>\n";
    return s.str();
}

inline void emit_plot(const std::vector<IntervalRecord>& rows, const std::string& path, const PlotStyle& style = {}) {
    const std::string svg = render_svg(rows, style);
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    out << svg;
}

}  // namespace ragic
