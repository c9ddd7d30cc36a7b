#pragma once

// Interval and point forecast metrics (CP, NMW, CWC, MAPE), the
// Bollinger-Bands baseline, and the evaluation report.

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragic/csv.hpp"
#include "ragic/date.hpp"
#include "ragic/error.hpp"
#include "ragic/interval.hpp"

namespace ragic {

namespace detail {
template <class Intervals>
void check_lengths(const Intervals& iv, std::span<const double> actuals, const char* what) {
    if (std::size(iv) != actuals.size()) fail(ErrorKind::length_mismatch, std::string(what) + ": length mismatch");
    if (actuals.empty()) fail(ErrorKind::length_mismatch, std::string(what) + ": no observations");
}
}  // namespace detail

/// Fraction of actuals inside the closed interval [lower, upper].
template <class Intervals>
double coverage_probability(const Intervals& intervals, std::span<const double> actuals) {
    detail::check_lengths(intervals, actuals, "coverage_probability");
    std::size_t covered = 0;
    std::size_t i = 0;
    for (const auto& iv : intervals) {
        if (actuals[i] >= iv.lower && actuals[i] <= iv.upper) ++covered;
        ++i;
    }
    return static_cast<double>(covered) / static_cast<double>(actuals.size());
}

/// Mean width divided by the range of the actuals.
template <class Intervals>
double normalized_mean_width(const Intervals& intervals, std::span<const double> actuals) {
    detail::check_lengths(intervals, actuals, "normalized_mean_width");
    const auto [lo, hi] = std::minmax_element(actuals.begin(), actuals.end());
    const double range = *hi - *lo;
    if (!(range > 0)) fail(ErrorKind::degenerate_range, "normalized_mean_width: actuals have zero range");
    double width = 0.0;
    for (const auto& iv : intervals) width += iv.upper - iv.lower;
    return width / (static_cast<double>(actuals.size()) * range);
}

/// NMW * (1 + [cp < target] * exp(eta * (target - cp))).
inline double cwc(double cp, double nmw, double eta, double target = 0.95) {
    if (cp >= target) return nmw;
    return nmw * (1.0 + std::exp(eta * (target - cp)));
}

inline double mape(std::span<const double> predictions, std::span<const double> actuals) {
    if (predictions.size() != actuals.size() || actuals.empty()) {
        fail(ErrorKind::length_mismatch, "mape: length mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        if (actuals[i] == 0.0) fail(ErrorKind::undefined_metric, "mape: zero actual value");
        total += std::fabs(actuals[i] - predictions[i]) / std::fabs(actuals[i]);
    }
    return total / static_cast<double>(actuals.size());
}

struct BollingerBand {
    bool defined = false;
    double lower = 0.0;
    double middle = 0.0;
    double upper = 0.0;
};

/// Rolling mean +- k population standard deviations; the first window-1
/// entries are undefined.
inline std::vector<BollingerBand> bollinger_bands(std::span<const double> closes, std::size_t window, double k) {
    if (window < 2) fail(ErrorKind::configuration, "bollinger: window must be at least 2");
    if (closes.size() < window) fail(ErrorKind::empty_dataset, "bollinger: series shorter than window");
    std::vector<BollingerBand> out(closes.size());
    for (std::size_t i = window - 1; i < closes.size(); ++i) {
        double mean = 0.0;
        for (std::size_t j = i + 1 - window; j <= i; ++j) mean += closes[j];
        mean /= static_cast<double>(window);
        double ss = 0.0;
        for (std::size_t j = i + 1 - window; j <= i; ++j) ss += (closes[j] - mean) * (closes[j] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(window));
        out[i] = {true, mean - k * sd, mean, mean + k * sd};
    }
    return out;
}

struct DayRecord {
    Date date;
    double lower = 0.0;
    double upper = 0.0;
    double point = 0.0;
    double actual = 0.0;
    bool covered = false;
};

struct EvaluationReport {
    double cp = 0.0;
    double nmw = 0.0;
    double cwc = 0.0;
    double mape = 0.0;
    double eta = 5.0;
    std::size_t T = 0;
    std::vector<DayRecord> per_day;
};

/// Joins forecasts with actual closes by date and computes every metric.
inline EvaluationReport evaluate(const std::vector<IntervalRecord>& intervals, const std::map<Date, double>& actuals,
                                 double eta, double cp_target = 0.95) {
    EvaluationReport rep;
    rep.eta = eta;
    for (const auto& iv : intervals) {
        auto it = actuals.find(iv.date);
        if (it == actuals.end()) continue;
        DayRecord d{iv.date, iv.lower, iv.upper, iv.point, it->second, false};
        d.covered = d.actual >= d.lower && d.actual <= d.upper;
        rep.per_day.push_back(d);
    }
    if (rep.per_day.empty()) fail(ErrorKind::alignment, "evaluate: no forecast dates with a known actual close");
    std::vector<double> act, pts;
    for (const auto& d : rep.per_day) {
        act.push_back(d.actual);
        pts.push_back(d.point);
    }
    rep.T = rep.per_day.size();
    rep.cp = coverage_probability(rep.per_day, act);
    rep.nmw = normalized_mean_width(rep.per_day, act);
    rep.cwc = cwc(rep.cp, rep.nmw, eta, cp_target);
    rep.mape = mape(pts, act);
    return rep;
}

/// evaluate() over records that carry their own actual_close.
inline EvaluationReport evaluate(const std::vector<IntervalRecord>& intervals, double eta, double cp_target = 0.95) {
    std::map<Date, double> actuals;
    for (const auto& r : intervals) {
        if (r.actual) actuals[r.date] = *r.actual;
    }
    return evaluate(intervals, actuals, eta, cp_target);
}

inline nlohmann::json to_json(const EvaluationReport& r) {
    nlohmann::json days = nlohmann::json::array();
    for (const auto& d : r.per_day) {
        days.push_back({{"date", d.date.iso()},
                        {"lower", d.lower},
                        {"upper", d.upper},
                        {"point", d.point},
                        {"actual", d.actual},
                        {"covered", d.covered}});
    }
    return {{"cp", r.cp}, {"nmw", r.nmw}, {"cwc", r.cwc}, {"mape", r.mape},
            {"eta", r.eta}, {"T", r.T}, {"per_day", days}};
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
    EvaluationReport r;
    r.cp = j.at("cp");
    r.nmw = j.at("nmw");
    r.cwc = j.at("cwc");
    r.mape = j.at("mape");
    r.eta = j.at("eta");
    r.T = j.at("T");
    for (const auto& d : j.at("per_day")) {
        r.per_day.push_back({Date::parse(d.at("date").get<std::string>()), d.at("lower"), d.at("upper"),
                             d.at("point"), d.at("actual"), d.at("covered")});
    }
    return r;
}

inline void write_report_csv(std::ostream& out, const EvaluationReport& r) {
    out << "date,lower,upper,point,actual,covered\n";
    for (const auto& d : r.per_day) {
        out << d.date.iso() << ',' << csv::format_double(d.lower) << ',' << csv::format_double(d.upper) << ','
            << csv::format_double(d.point) << ',' << csv::format_double(d.actual) << ',' << (d.covered ? 1 : 0)
            << '\n';
    }
}

}  // namespace ragic
