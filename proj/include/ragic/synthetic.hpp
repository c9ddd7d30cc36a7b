#pragma once

// Synthetic market generator: geometric Brownian motion whose daily
// volatility switches between regimes, with a volatility index that tracks
// the annualized regime volatility. Used for demos and tests.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ragic/csv.hpp"
#include "ragic/date.hpp"
#include "ragic/error.hpp"
#include "ragic/market_data.hpp"
#include "ragic/rng.hpp"

namespace ragic {

struct Regime {
    int days = 250;
    double daily_sigma = 0.01;
};

struct SyntheticMarketSpec {
    std::vector<Regime> regimes = {{600, 0.006}, {300, 0.02}, {300, 0.006}, {300, 0.02}};
    double start_price = 1000.0;
    double daily_drift = 0.0002;
    double vol_index_noise = 0.03;  // relative noise on the index level
    Date start = Date(2000, 1, 3);
    std::uint64_t seed = 7;
};

struct SyntheticMarket {
    std::vector<Bar> bars;
    std::vector<VolPoint> vols;
    std::vector<double> regime_sigma;  // per day
};

/// Weekdays only, starting at `start` (or the next weekday).
inline std::vector<Date> business_days(Date start, std::size_t n) {
    std::vector<Date> out;
    Date d = start;
    while (out.size() < n) {
        const long wd = (d.serial() + 4) % 7;  // 1970-01-01 was a Thursday; 0 = Sunday
        if (wd != 0 && wd != 6) out.push_back(d);
        d = d.plus_days(1);
    }
    return out;
}

inline SyntheticMarket make_synthetic_market(const SyntheticMarketSpec& spec) {
    Rng rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::size_t total = 0;
    for (const auto& r : spec.regimes) total += static_cast<std::size_t>(r.days);
    const auto dates = business_days(spec.start, total);
    SyntheticMarket m;
    double close = spec.start_price;
    std::size_t day = 0;
    for (const auto& regime : spec.regimes) {
        for (int k = 0; k < regime.days; ++k, ++day) {
            const double s = regime.daily_sigma;
            const double open = close * std::exp(0.2 * s * gauss(rng));
            close = close * std::exp(spec.daily_drift - 0.5 * s * s + s * gauss(rng));
            const double high = std::max(open, close) * (1.0 + 0.5 * s * std::fabs(gauss(rng)));
            const double low = std::min(open, close) * (1.0 - 0.5 * s * std::fabs(gauss(rng)));
            const double volume = 1e6 * std::exp(0.2 * gauss(rng) + 10.0 * s);
            m.bars.push_back({dates[day], open, high, low, close, volume});
            const double level = 100.0 * s * std::sqrt(252.0) * std::exp(spec.vol_index_noise * gauss(rng));
            m.vols.push_back({dates[day], level});
            m.regime_sigma.push_back(s);
        }
    }
    return m;
}

inline void write_ohlcv_csv(const std::string& path, const std::vector<Bar>& bars) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    out << "date,open,high,low,close,volume\n";
    for (const auto& b : bars) {
        out << b.date.iso() << ',' << csv::format_double(b.open) << ',' << csv::format_double(b.high) << ','
            << csv::format_double(b.low) << ',' << csv::format_double(b.close) << ','
            << csv::format_double(b.volume) << '\n';
    }
}

inline void write_vol_csv(const std::string& path, const std::vector<VolPoint>& vols) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    out << "date,close\n";
    for (const auto& v : vols) out << v.date.iso() << ',' << csv::format_double(v.vol_close) << '\n';
}

}  // namespace ragic
