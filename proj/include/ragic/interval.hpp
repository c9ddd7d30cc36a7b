#pragma once

// Interval construction: horizon-wise ensemble simulation, t-based
// prediction bounds, volatility-driven confidence and the weighted point
// forecast.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ragic/csv.hpp"
#include "ragic/date.hpp"
#include "ragic/error.hpp"
#include "ragic/generator.hpp"
#include "ragic/market_data.hpp"
#include "ragic/rng.hpp"
#include "ragic/student_t.hpp"

namespace ragic {

struct SigmoidConfig {
    double v_l = 10.0;
    double v_u = 22.0;
    double c_l = 0.90;
    double c_u = 0.999;
    double delta_eps = 1e-4;

    void validate() const {
        if (!(v_l < v_u)) fail(ErrorKind::config, "sigmoid: v_l must be below v_u");
        if (!(0.0 < c_l && c_l < c_u && c_u < 1.0)) fail(ErrorKind::config, "sigmoid: need 0 < c_l < c_u < 1");
        if (!(0.0 < delta_eps && delta_eps < c_u - c_l)) {
            fail(ErrorKind::config, "sigmoid: need 0 < delta_eps < c_u - c_l");
        }
    }

    /// Steepness chosen so the curve is exactly delta_eps away from its
    /// bounds at v_l and v_u.
    double steepness() const { return std::log((c_u - c_l) / delta_eps - 1.0) * 2.0 / (v_u - v_l); }
    double midpoint() const { return 0.5 * (v_l + v_u); }

    bool operator==(const SigmoidConfig&) const = default;
};

/// Confidence level for the next interval from the previous day's raw
/// volatility-index close.
inline double confidence(double v_prev, const SigmoidConfig& cfg) {
    return cfg.c_l + (cfg.c_u - cfg.c_l) / (1.0 + std::exp(-cfg.steepness() * (v_prev - cfg.midpoint())));
}

/// price_h = anchor * prod_{i<=h} (1 + r_i).
inline Vector returns_to_prices(double anchor_close, const Vector& returns) {
    if (!(anchor_close > 0)) fail(ErrorKind::invalid_return, "returns_to_prices: anchor close must be positive");
    Vector prices(returns.size());
    double p = anchor_close;
    for (Eigen::Index h = 0; h < returns.size(); ++h) {
        if (!(returns(h) > -1.0)) {
            fail(ErrorKind::invalid_return, "returns_to_prices: return " + std::to_string(returns(h)) + " <= -1");
        }
        p *= 1.0 + returns(h);
        prices(h) = p;
    }
    return prices;
}

/// N*H simulated closes for one target day. Member i came from draw draw[i]
/// (1-based) on the window ending offset[i] days before the target.
struct PredictionEnsemble {
    std::size_t target_index = 0;
    std::optional<Date> target_date;
    int draws = 0;
    int horizon = 0;
    std::vector<double> values;
    std::vector<int> draw;
    std::vector<int> offset;
    std::vector<double> anchor_closes;  // entry j-1 is the close at t-j

    std::size_t size() const { return values.size(); }

    /// One vector per draw; entry h-1 is the prediction from offset h.
    std::vector<Vector> prediction_vectors() const {
        std::vector<Vector> out(static_cast<std::size_t>(draws), Vector::Zero(horizon));
        for (std::size_t i = 0; i < values.size(); ++i) {
            out[static_cast<std::size_t>(draw[i] - 1)](offset[i] - 1) = values[i];
        }
        return out;
    }
};

/// Runs the generator once per (offset j, draw n) on the window ending at
/// t - j with fresh noise, converts the returns to prices anchored at
/// close(t - j) and keeps the j-th price. Loop order is j = H..1, n = 1..N.
/// `generator(window, noise)` must return H close returns.
template <class GeneratorFn>
PredictionEnsemble simulate_horizon(const GeneratorFn& generator, const FeatureTable& table, std::size_t t,
                                    int N, int W, int H, std::uint64_t seed) {
    if (N < 1 || W < 1 || H < 1) fail(ErrorKind::configuration, "simulate_horizon: N, W, H must be positive");
    const auto uW = static_cast<std::size_t>(W);
    const auto uH = static_cast<std::size_t>(H);
    if (t > table.rows() || t < uH + uW - 1) {
        fail(ErrorKind::coverage_gap, "simulate_horizon: need " + std::to_string(W + H - 1) +
                                          " rows of history before target index " + std::to_string(t));
    }
    PredictionEnsemble e;
    e.target_index = t;
    if (t < table.rows()) e.target_date = table.dates[t];
    e.draws = N;
    e.horizon = H;
    e.anchor_closes.resize(uH);
    e.values.reserve(uH * static_cast<std::size_t>(N));
    for (int j = H; j >= 1; --j) {
        const std::size_t end = t - static_cast<std::size_t>(j);
        const Matrix window = window_ending_at(table, end, uW);
        const double anchor = table.raw_close[end];
        e.anchor_closes[static_cast<std::size_t>(j - 1)] = anchor;
        for (int n = 1; n <= N; ++n) {
            Rng rng(mix_seed(seed, t, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(n)));
            const Vector z = sample_noise(rng, W);
            const Vector returns = generator(window, z);
            if (returns.size() != H) fail(ErrorKind::configuration, "simulate_horizon: generator horizon mismatch");
            const Vector prices = returns_to_prices(anchor, returns);
            e.values.push_back(prices(j - 1));
            e.draw.push_back(n);
            e.offset.push_back(j);
        }
    }
    return e;
}

/// Convenience overload for a trained generator.
inline PredictionEnsemble simulate_horizon(const GeneratorParams& params, const FeatureTable& table,
                                           std::size_t t, int N, std::uint64_t seed) {
    return simulate_horizon([&params](const Matrix& x, const Vector& z) { return generator_forward(x, z, params); },
                            table, t, N, params.config.window, params.config.horizon, seed);
}

struct SampleStats {
    double mean = 0.0;
    double variance = 0.0;
};

/// Sample mean and unbiased (n-1) variance.
inline SampleStats sample_stats(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) fail(ErrorKind::degenerate_ensemble, "sample_stats: need at least 2 members");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, ss / static_cast<double>(n - 1)};
}

inline SampleStats sample_stats(const PredictionEnsemble& e) { return sample_stats(e.values); }

/// Per draw, the mean over horizon offsets weighted by 1/2^h; then the plain
/// mean over draws.
inline double point_predict(const std::vector<Vector>& predictions) {
    if (predictions.empty()) fail(ErrorKind::shape, "point_predict: no prediction vectors");
    double total = 0.0;
    for (const auto& p : predictions) {
        if (p.size() < 1) fail(ErrorKind::shape, "point_predict: empty prediction vector");
        double num = 0.0;
        double den = 0.0;
        double w = 1.0;
        for (Eigen::Index h = 0; h < p.size(); ++h) {
            w *= 0.5;
            num += w * p(h);
            den += w;
        }
        total += num / den;
    }
    return total / static_cast<double>(predictions.size());
}

struct PredictionInterval {
    std::optional<Date> target_date;
    double lower = 0.0;
    double upper = 0.0;
    double confidence = 0.0;
    double point = 0.0;
};

/// Half-width multiplier t_{1-(1-c)/2}(n-1) * sqrt(1 + 1/n).
inline double interval_multiplier(std::size_t n, double c) {
    if (!(c > 0.0 && c < 1.0)) fail(ErrorKind::out_of_range, "interval: confidence must lie in (0, 1)");
    const double nn = static_cast<double>(n);
    return t_quantile(1.0 - (1.0 - c) / 2.0, nn - 1.0) * std::sqrt(1.0 + 1.0 / nn);
}

/// Prediction bounds for one new observation from the ensemble's mean and
/// spread, with the point forecast attached.
inline PredictionInterval build_interval(const std::vector<double>& values, double c, double point) {
    const SampleStats st = sample_stats(values);
    const double half = interval_multiplier(values.size(), c) * std::sqrt(st.variance);
    return {std::nullopt, st.mean - half, st.mean + half, c, point};
}

inline PredictionInterval build_interval(const PredictionEnsemble& e, double c) {
    PredictionInterval iv = build_interval(e.values, c, point_predict(e.prediction_vectors()));
    iv.target_date = e.target_date;
    return iv;
}

// ---------------------------------------------------------------------------
// Interval CSV: date,lower,upper,confidence,point,actual_close

struct IntervalRecord {
    Date date;
    double lower = 0.0;
    double upper = 0.0;
    double confidence = 0.0;
    double point = 0.0;
    std::optional<double> actual;
};

inline void write_interval_csv(std::ostream& out, const std::vector<IntervalRecord>& rows) {
    out << "date,lower,upper,confidence,point,actual_close\n";
    for (const auto& r : rows) {
        out << r.date.iso() << ',' << csv::format_double(r.lower) << ',' << csv::format_double(r.upper) << ','
            << csv::format_double(r.confidence) << ',' << csv::format_double(r.point) << ',';
        if (r.actual) out << csv::format_double(*r.actual);
        out << '\n';
    }
}

inline std::vector<IntervalRecord> read_interval_csv(std::istream& in, const std::string& source = "intervals") {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::parse, source + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,lower,upper,confidence,point,actual_close") {
        fail(ErrorKind::parse, source + ":1: unexpected header");
    }
    std::vector<IntervalRecord> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = csv::split(line);
        IntervalRecord r;
        bool ok = f.size() == 6 && Date::try_parse(f[0], r.date) && csv::parse_double(f[1], r.lower) &&
                  csv::parse_double(f[2], r.upper) && csv::parse_double(f[3], r.confidence) &&
                  csv::parse_double(f[4], r.point);
        if (ok && !f[5].empty()) {
            double a = 0.0;
            ok = csv::parse_double(f[5], a);
            r.actual = a;
        }
        if (!ok) fail(ErrorKind::parse, source + ":" + std::to_string(lineno) + ": malformed interval row");
        rows.push_back(r);
    }
    return rows;
}

}  // namespace ragic
