#pragma once

// Ingestion of daily index bars and the matching volatility index, feature
// engineering, volatility scaling, train/validation/test splits and
// sliding-window sample construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "ragic/csv.hpp"
#include "ragic/date.hpp"
#include "ragic/error.hpp"
#include "ragic/log.hpp"

namespace ragic {

struct Bar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
};

struct VolPoint {
    Date date;
    double vol_close = 0.0;
};

/// One calendar-aligned trading day carrying both the bar and the
/// volatility-index close.
struct JoinedRow {
    Bar bar;
    double vol_close = 0.0;
};

using JoinedSeries = std::vector<JoinedRow>;

/// Feature column order of every FeatureTable.
enum Column : int {
    kOpenRet = 0,
    kHighRet,
    kLowRet,
    kCloseRet,
    kVolumeRet,
    kMacdDiff,
    kBbUpper,
    kBbLower,
    kEma5,
    kSma13,
    kSma21,
    kSma50,
    kVolRet,
    kVolScaled,
    kFeatureCount
};

inline const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "open_ret", "high_ret", "low_ret", "close_ret", "volume_ret", "macd_diff", "bb_upper",
        "bb_lower", "ema_5",    "sma_13",   "sma_21",  "sma_50",    "vol_ret",    "vol_scaled"};
    return names;
}

/// Rows dropped from the front of the series so that every indicator
/// (SMA-50, MACD signal line, returns) is defined.
inline constexpr std::size_t kWarmupRows = 50;
inline constexpr std::size_t kMinFeatureRows = 60;

struct FeatureTable {
    std::vector<Date> dates;
    Eigen::MatrixXd values;  // T x K
    std::vector<std::string> column_names;
    std::vector<bool> volatility_mask;
    std::vector<double> raw_close;
    std::vector<double> raw_vol;
    bool levels_normalized = false;

    std::size_t rows() const { return dates.size(); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

struct WindowSample {
    Eigen::MatrixXd x;  // W x K
    Eigen::VectorXd y;  // H close returns after the anchor
    double anchor_close = 0.0;
    Date anchor_date;
    std::size_t anchor_index = 0;
};

enum class Split { train, validation, test };

struct SplitSpec {
    Date train_end;
    Date val_end;

    void validate() const {
        if (!(train_end < val_end)) {
            fail(ErrorKind::config, "split: train_end must precede val_end");
        }
    }

    Split of(const Date& d) const {
        if (d <= train_end) return Split::train;
        if (d <= val_end) return Split::validation;
        return Split::test;
    }
};

struct ScalerState {
    double vol_min = 0.0;
    double vol_max = 1.0;
};

namespace detail {

inline std::string line_error(const std::string& source, std::size_t line, const std::string& what) {
    return source + ":" + std::to_string(line) + ": " + what;
}

template <class Row>
void sort_and_check(std::vector<Row>& rows, const std::string& source,
                    std::vector<std::string>* warnings, auto date_of) {
    bool sorted = std::is_sorted(rows.begin(), rows.end(),
                                 [&](const Row& a, const Row& b) { return date_of(a) < date_of(b); });
    if (!sorted) {
        std::stable_sort(rows.begin(), rows.end(),
                         [&](const Row& a, const Row& b) { return date_of(a) < date_of(b); });
        std::string msg = source + ": rows not in date order; re-sorted ascending";
        log().warn("{}", msg);
        if (warnings) warnings->push_back(msg);
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (date_of(rows[i]) == date_of(rows[i - 1])) {
            fail(ErrorKind::validation, source + ": duplicate date " + date_of(rows[i]).iso());
        }
    }
}

}  // namespace detail

/// Reads `date,open,high,low,close,volume` CSV. Rows come back sorted by date.
inline std::vector<Bar> parse_ohlcv(std::istream& in, const std::string& source = "ohlcv",
                                    std::vector<std::string>* warnings = nullptr) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::parse, source + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,open,high,low,close,volume") {
        fail(ErrorKind::parse, detail::line_error(source, 1, "expected header 'date,open,high,low,close,volume'"));
    }
    std::vector<Bar> bars;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = csv::split(line);
        if (fields.size() != 6) {
            fail(ErrorKind::parse, detail::line_error(source, lineno, "expected 6 fields"));
        }
        Bar b;
        if (!Date::try_parse(fields[0], b.date)) {
            fail(ErrorKind::parse, detail::line_error(source, lineno, "bad date"));
        }
        double* targets[] = {&b.open, &b.high, &b.low, &b.close, &b.volume};
        for (int i = 0; i < 5; ++i) {
            if (!csv::parse_double(fields[i + 1], *targets[i]) || !std::isfinite(*targets[i])) {
                fail(ErrorKind::parse, detail::line_error(source, lineno, "bad number"));
            }
        }
        if (b.open <= 0 || b.high <= 0 || b.low <= 0 || b.close <= 0) {
            fail(ErrorKind::validation, detail::line_error(source, lineno, "non-positive price"));
        }
        if (b.volume < 0) {
            fail(ErrorKind::validation, detail::line_error(source, lineno, "negative volume"));
        }
        if (b.low > std::min(b.open, b.close) || b.high < std::max(b.open, b.close)) {
            fail(ErrorKind::validation, detail::line_error(source, lineno, "high/low inconsistent with open/close"));
        }
        bars.push_back(b);
    }
    detail::sort_and_check(bars, source, warnings, [](const Bar& b) { return b.date; });
    return bars;
}

/// Reads a `date,close` volatility-index CSV.
inline std::vector<VolPoint> parse_vol(std::istream& in, const std::string& source = "volatility",
                                       std::vector<std::string>* warnings = nullptr) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::parse, source + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,close") {
        fail(ErrorKind::parse, detail::line_error(source, 1, "expected header 'date,close'"));
    }
    std::vector<VolPoint> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = csv::split(line);
        if (fields.size() != 2) fail(ErrorKind::parse, detail::line_error(source, lineno, "expected 2 fields"));
        VolPoint p;
        if (!Date::try_parse(fields[0], p.date)) {
            fail(ErrorKind::parse, detail::line_error(source, lineno, "bad date"));
        }
        if (!csv::parse_double(fields[1], p.vol_close) || !std::isfinite(p.vol_close)) {
            fail(ErrorKind::parse, detail::line_error(source, lineno, "bad number"));
        }
        if (p.vol_close <= 0) {
            fail(ErrorKind::validation, detail::line_error(source, lineno, "non-positive volatility"));
        }
        out.push_back(p);
    }
    detail::sort_and_check(out, source, warnings, [](const VolPoint& p) { return p.date; });
    return out;
}

inline std::vector<Bar> load_ohlcv(const std::string& path, std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open " + path);
    return parse_ohlcv(in, path, warnings);
}

inline std::vector<VolPoint> load_vol(const std::string& path, std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open " + path);
    return parse_vol(in, path, warnings);
}

/// Inner join on date. Fails when the overlap is below 80% of the shorter
/// series, which usually means the two files describe different markets.
inline JoinedSeries align_calendars(const std::vector<Bar>& bars, const std::vector<VolPoint>& vols) {
    if (bars.empty() || vols.empty()) fail(ErrorKind::alignment, "align: empty input series");
    std::unordered_map<long, double> vol_by_day;
    vol_by_day.reserve(vols.size());
    for (const auto& v : vols) vol_by_day.emplace(v.date.serial(), v.vol_close);
    JoinedSeries out;
    for (const auto& b : bars) {
        auto it = vol_by_day.find(b.date.serial());
        if (it != vol_by_day.end()) out.push_back({b, it->second});
    }
    std::size_t shorter = std::min(bars.size(), vols.size());
    if (static_cast<double>(out.size()) < 0.8 * static_cast<double>(shorter)) {
        fail(ErrorKind::alignment, "align: only " + std::to_string(out.size()) + " common dates of " +
                                       std::to_string(shorter) + " in the shorter series");
    }
    return out;
}

// Indicator primitives, over the full (pre warm-up) series.

inline double relative_change(double now, double prev) {
    return prev == 0.0 ? 0.0 : now / prev - 1.0;
}

/// Recursive EMA with alpha = 2/(span+1), seeded with the first value.
inline std::vector<double> ema(const std::vector<double>& x, int span) {
    std::vector<double> out(x.size());
    if (x.empty()) return out;
    const double alpha = 2.0 / (span + 1.0);
    out[0] = x[0];
    for (std::size_t i = 1; i < x.size(); ++i) out[i] = alpha * x[i] + (1.0 - alpha) * out[i - 1];
    return out;
}

/// Trailing simple moving average; NaN until `window` values are available.
inline std::vector<double> sma(const std::vector<double>& x, std::size_t window) {
    std::vector<double> out(x.size(), std::nan(""));
    for (std::size_t i = window - 1; i < x.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = i + 1 - window; j <= i; ++j) s += x[j];
        out[i] = s / static_cast<double>(window);
    }
    return out;
}

/// Trailing population standard deviation; NaN until `window` values exist.
inline std::vector<double> rolling_std(const std::vector<double>& x, std::size_t window) {
    std::vector<double> mean = sma(x, window);
    std::vector<double> out(x.size(), std::nan(""));
    for (std::size_t i = window - 1; i < x.size(); ++i) {
        double ss = 0.0;
        for (std::size_t j = i + 1 - window; j <= i; ++j) ss += (x[j] - mean[i]) * (x[j] - mean[i]);
        out[i] = std::sqrt(ss / static_cast<double>(window));
    }
    return out;
}

/// MACD histogram: (EMA12 - EMA26) minus its 9-period EMA.
inline std::vector<double> macd_diff(const std::vector<double>& close) {
    auto fast = ema(close, 12);
    auto slow = ema(close, 26);
    std::vector<double> macd(close.size());
    for (std::size_t i = 0; i < close.size(); ++i) macd[i] = fast[i] - slow[i];
    auto signal = ema(macd, 9);
    for (std::size_t i = 0; i < close.size(); ++i) macd[i] -= signal[i];
    return macd;
}

/// Builds the 14-column feature table and drops the warm-up rows. Indicator
/// columns are in price units here; see normalize_levels. The vol_scaled
/// column holds the raw index level until apply_scaler runs.
inline FeatureTable compute_features(const JoinedSeries& joined) {
    const std::size_t n = joined.size();
    if (n < kMinFeatureRows) {
        fail(ErrorKind::warmup, "features: need at least " + std::to_string(kMinFeatureRows) +
                                    " rows, got " + std::to_string(n));
    }
    std::vector<double> open(n), high(n), low(n), close(n), volume(n), vol(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = joined[i].bar;
        open[i] = b.open;
        high[i] = b.high;
        low[i] = b.low;
        close[i] = b.close;
        volume[i] = b.volume;
        vol[i] = joined[i].vol_close;
    }
    const auto macd = macd_diff(close);
    const auto bb_mid = sma(close, 20);
    const auto bb_std = rolling_std(close, 20);
    const auto ema5 = ema(close, 5);
    const auto sma13 = sma(close, 13);
    const auto sma21 = sma(close, 21);
    const auto sma50 = sma(close, 50);

    FeatureTable t;
    const std::size_t T = n - kWarmupRows;
    t.values.resize(static_cast<Eigen::Index>(T), kFeatureCount);
    t.column_names.assign(feature_names().begin(), feature_names().end());
    t.volatility_mask.assign(kFeatureCount, false);
    t.volatility_mask[kVolRet] = true;
    t.volatility_mask[kVolScaled] = true;
    for (std::size_t i = kWarmupRows; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i - kWarmupRows);
        t.dates.push_back(joined[i].bar.date);
        t.raw_close.push_back(close[i]);
        t.raw_vol.push_back(vol[i]);
        t.values(r, kOpenRet) = relative_change(open[i], open[i - 1]);
        t.values(r, kHighRet) = relative_change(high[i], high[i - 1]);
        t.values(r, kLowRet) = relative_change(low[i], low[i - 1]);
        t.values(r, kCloseRet) = relative_change(close[i], close[i - 1]);
        t.values(r, kVolumeRet) = relative_change(volume[i], volume[i - 1]);
        t.values(r, kMacdDiff) = macd[i];
        t.values(r, kBbUpper) = bb_mid[i] + 2.0 * bb_std[i];
        t.values(r, kBbLower) = bb_mid[i] - 2.0 * bb_std[i];
        t.values(r, kEma5) = ema5[i];
        t.values(r, kSma13) = sma13[i];
        t.values(r, kSma21) = sma21[i];
        t.values(r, kSma50) = sma50[i];
        t.values(r, kVolRet) = relative_change(vol[i], vol[i - 1]);
        t.values(r, kVolScaled) = vol[i];
    }
    if (!t.values.allFinite()) fail(ErrorKind::numeric, "features: non-finite value after warm-up cut");
    return t;
}

/// Expresses the price-level indicator columns relative to the same day's
/// close (level/close - 1, and macd/close), so that every network input is a
/// unitless quantity of order one. Idempotent.
inline FeatureTable normalize_levels(FeatureTable table) {
    if (table.levels_normalized) return table;
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        const double c = table.raw_close[static_cast<std::size_t>(r)];
        table.values(r, kMacdDiff) /= c;
        for (int col : {kBbUpper, kBbLower, kEma5, kSma13, kSma21, kSma50}) {
            table.values(r, col) = table.values(r, col) / c - 1.0;
        }
    }
    table.levels_normalized = true;
    return table;
}

inline std::vector<Split> assign_splits(const FeatureTable& table, const SplitSpec& split) {
    std::vector<Split> out;
    out.reserve(table.rows());
    for (const auto& d : table.dates) out.push_back(split.of(d));
    return out;
}

/// Min-max range of the raw volatility index over training rows only.
inline ScalerState fit_scaler(const FeatureTable& table, const SplitSpec& split) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        if (split.of(table.dates[i]) != Split::train) continue;
        lo = std::min(lo, table.raw_vol[i]);
        hi = std::max(hi, table.raw_vol[i]);
        any = true;
    }
    if (!any) fail(ErrorKind::empty_dataset, "scaler: no training rows");
    if (!(hi > lo)) fail(ErrorKind::degenerate_scaler, "scaler: constant training volatility");
    return {lo, hi};
}

/// Rewrites vol_scaled from raw_vol. Values outside the training range are
/// not clipped.
inline FeatureTable apply_scaler(FeatureTable table, const ScalerState& s) {
    const double span = s.vol_max - s.vol_min;
    if (!(span > 0)) fail(ErrorKind::degenerate_scaler, "scaler: zero range");
    for (std::size_t i = 0; i < table.rows(); ++i) {
        table.values(static_cast<Eigen::Index>(i), kVolScaled) = (table.raw_vol[i] - s.vol_min) / span;
    }
    return table;
}

/// Feature rows [end-W+1, end].
inline Eigen::MatrixXd window_ending_at(const FeatureTable& table, std::size_t end, std::size_t W) {
    return table.values.middleRows(static_cast<Eigen::Index>(end + 1 - W), static_cast<Eigen::Index>(W));
}

/// All samples with W rows of history ending at anchor t and H future close
/// returns.
inline std::vector<WindowSample> make_windows(const FeatureTable& table, std::size_t W, std::size_t H) {
    const std::size_t T = table.rows();
    if (W == 0 || H == 0 || T < W + H) {
        fail(ErrorKind::empty_dataset, "windows: need T >= W + H (T=" + std::to_string(T) + ", W=" +
                                           std::to_string(W) + ", H=" + std::to_string(H) + ")");
    }
    std::vector<WindowSample> out;
    out.reserve(T - W - H + 1);
    for (std::size_t t = W - 1; t + H < T; ++t) {
        WindowSample s;
        s.x = window_ending_at(table, t, W);
        s.y.resize(static_cast<Eigen::Index>(H));
        for (std::size_t h = 1; h <= H; ++h) {
            s.y(static_cast<Eigen::Index>(h - 1)) = table.raw_close[t + h] / table.raw_close[t + h - 1] - 1.0;
        }
        s.anchor_close = table.raw_close[t];
        s.anchor_date = table.dates[t];
        s.anchor_index = t;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace ragic
