#pragma once

// Deliberately naive indicator formulas, one day at a time, used as the
// oracle for the feature table. Keep this file independent of
// market_data.hpp: nothing here may call into the library.

#include <cmath>
#include <cstddef>
#include <vector>

namespace reference {

inline double mean_window(const std::vector<double>& x, std::size_t end, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = end + 1 - n; i <= end; ++i) s += x[i];
    return s / static_cast<double>(n);
}

inline double pop_std_window(const std::vector<double>& x, std::size_t end, std::size_t n) {
    const double m = mean_window(x, end, n);
    double s = 0.0;
    for (std::size_t i = end + 1 - n; i <= end; ++i) s += (x[i] - m) * (x[i] - m);
    return std::sqrt(s / static_cast<double>(n));
}

/// EMA at `end` computed by recursion from the first observation.
inline double ema_at(const std::vector<double>& x, std::size_t end, int span) {
    const double a = 2.0 / (span + 1.0);
    double e = x[0];
    for (std::size_t i = 1; i <= end; ++i) e = a * x[i] + (1.0 - a) * e;
    return e;
}

/// MACD line (EMA12 - EMA26) minus its EMA9, recomputed from scratch.
inline double macd_hist_at(const std::vector<double>& close, std::size_t end) {
    std::vector<double> line;
    for (std::size_t i = 0; i <= end; ++i) line.push_back(ema_at(close, i, 12) - ema_at(close, i, 26));
    return line[end] - ema_at(line, end, 9);
}

inline double pct_change(double now, double prev) { return prev == 0.0 ? 0.0 : now / prev - 1.0; }

}  // namespace reference
