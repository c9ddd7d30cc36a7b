#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace ragic;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected ragic::Error";
    return ErrorKind::io;
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

struct Band {
    double lower, upper;
};

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

std::string attribute_points(const std::string& svg, const std::string& element_class) {
    const auto at = svg.find("class=\"" + element_class + "\"");
    const auto start = svg.find("points=\"", at) + 8;
    return svg.substr(start, svg.find('"', start) - start);
}

}  // namespace

TEST(Coverage, CountsClosedInterval) {
    const std::vector<Band> iv = {{0, 1}, {0, 1}, {0, 1}};
    const std::vector<double> in = {0.5, 0.0, 1.0};
    EXPECT_DOUBLE_EQ(coverage_probability(iv, in), 1.0);
    const std::vector<double> two = {0.5, 2.0, 1.0};
    EXPECT_NEAR(coverage_probability(iv, two), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(kind_of([&] { coverage_probability(iv, std::vector<double>{1.0}); }), ErrorKind::length_mismatch);
}

TEST(Nmw, HandExample) {
    const std::vector<Band> iv = {{99, 101}, {108, 112}};
    const std::vector<double> a = {100, 110};
    EXPECT_NEAR(normalized_mean_width(iv, a), 0.30, 1e-15);
    const std::vector<Band> zero = {{100, 100}, {110, 110}};
    EXPECT_DOUBLE_EQ(normalized_mean_width(zero, a), 0.0);
    const std::vector<Band> scaled = {{990, 1010}, {1080, 1120}};
    EXPECT_NEAR(normalized_mean_width(scaled, std::vector<double>{1000, 1100}), 0.30, 1e-15);
    EXPECT_EQ(kind_of([&] { normalized_mean_width(iv, std::vector<double>{5, 5}); }), ErrorKind::degenerate_range);
}

TEST(Cwc, ReferenceRows) {
    EXPECT_NEAR(100 * cwc(0.8197, 0.0752, 5), 21.95, 0.03);
    EXPECT_NEAR(100 * cwc(0.9556, 0.0542, 5), 5.42, 0.03);
    EXPECT_NEAR(100 * cwc(0.8637, 0.0611, 5), 15.52, 0.03);
}

TEST(Cwc, IndicatorFormAndMonotonicity) {
    EXPECT_DOUBLE_EQ(cwc(0.95, 0.1, 5), 0.1);
    EXPECT_DOUBLE_EQ(cwc(1.0, 0.1, 5), 0.1);
    double prev = cwc(0.0, 0.1, 5);
    for (double cp = 0.01; cp < 0.95; cp += 0.01) {
        const double v = cwc(cp, 0.1, 5);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(Mape, HandExamples) {
    EXPECT_DOUBLE_EQ(mape(std::vector<double>{5, 6}, std::vector<double>{5, 6}), 0.0);
    EXPECT_NEAR(mape(std::vector<double>{99}, std::vector<double>{100}), 0.01, 1e-15);
    EXPECT_NEAR(mape(std::vector<double>{110, 180}, std::vector<double>{100, 200}), 0.10, 1e-15);
    EXPECT_EQ(kind_of([] { mape(std::vector<double>{1}, std::vector<double>{0}); }), ErrorKind::undefined_metric);
}

TEST(Bollinger, HandExample) {
    const auto b = bollinger_bands(std::vector<double>{10, 14}, 2, 2.0);
    EXPECT_FALSE(b[0].defined);
    EXPECT_DOUBLE_EQ(b[1].middle, 12.0);
    EXPECT_DOUBLE_EQ(b[1].lower, 8.0);
    EXPECT_DOUBLE_EQ(b[1].upper, 16.0);
    const auto flat = bollinger_bands(std::vector<double>(25, 3.0), 20, 2.0);
    EXPECT_DOUBLE_EQ(flat[24].lower, 3.0);
    EXPECT_DOUBLE_EQ(flat[24].upper, 3.0);
    EXPECT_DOUBLE_EQ(flat[24].middle, 3.0);
}

TEST(Evaluate, FixtureReport) {
    // three days: covered, covered on the bound, missed; one interval has no actual
    const std::vector<IntervalRecord> iv = {{Date(2021, 1, 4), 99, 101, 0.95, 99, std::nullopt},
                                             {Date(2021, 1, 5), 108, 110, 0.95, 110, std::nullopt},
                                             {Date(2021, 1, 6), 104, 106, 0.95, 105, std::nullopt},
                                             {Date(2021, 1, 7), 1, 2, 0.95, 1.5, std::nullopt}};
    const std::map<Date, double> actuals = {
        {Date(2021, 1, 4), 100}, {Date(2021, 1, 5), 110}, {Date(2021, 1, 6), 108}};
    const auto r = evaluate(iv, actuals, 5.0);
    EXPECT_EQ(r.T, 3u);
    EXPECT_NEAR(r.cp, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(r.nmw, 6.0 / 30.0, 1e-15);
    EXPECT_NEAR(r.cwc, 0.2 * (1 + std::exp(5 * (0.95 - 2.0 / 3.0))), 1e-12);
    EXPECT_NEAR(r.mape, (0.01 + 0.0 + 3.0 / 108.0) / 3.0, 1e-15);
    EXPECT_TRUE(r.per_day[1].covered);
    EXPECT_FALSE(r.per_day[2].covered);
    EXPECT_EQ(kind_of([&] { evaluate(iv, std::map<Date, double>{}, 5.0); }), ErrorKind::alignment);
}

TEST(Evaluate, JsonRoundTrip) {
    const std::vector<IntervalRecord> iv = {{Date(2021, 1, 4), 99, 101, 0.95, 99, 100.0},
                                             {Date(2021, 1, 5), 108, 111, 0.95, 110, 112.0}};
    const auto r = evaluate(iv, 5.0);
    const auto j = to_json(r);
    const auto back = report_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(to_json(back), j);
    for (const char* key : {"cp", "nmw", "cwc", "mape", "eta", "T", "per_day"}) EXPECT_TRUE(j.contains(key));
    EXPECT_EQ(j["per_day"][0]["date"], "2021-01-04");
}

// --- config ------------------------------------------------------------------

TEST(Config, MinimalConfigTakesDefaults) {
    const auto c = config_from_json({{"ohlcv_path", "a.csv"}, {"vol_path", "b.csv"}});
    EXPECT_EQ(c.W, 30);
    EXPECT_EQ(c.H, 5);
    EXPECT_EQ(c.N, 50);
    EXPECT_DOUBLE_EQ(c.gamma, 0.3);
    EXPECT_DOUBLE_EQ(c.xi, 0.01);
    EXPECT_DOUBLE_EQ(c.c_l, 0.90);
    EXPECT_DOUBLE_EQ(c.c_u, 0.999);
    EXPECT_DOUBLE_EQ(c.delta_eps, 1e-4);
    EXPECT_DOUBLE_EQ(c.eta, 5.0);
    EXPECT_DOUBLE_EQ(c.lr_critic, 3e-4);
    EXPECT_EQ(c.n_critic, 5);
    c.validate(false);
}

TEST(Config, UnknownKeyIsNamed) {
    const std::string msg =
        message_of([] { config_from_json({{"ohlcv_path", "a"}, {"vol_path", "b"}, {"foo", 1}}); });
    EXPECT_NE(msg.find("'foo'"), std::string::npos) << msg;
}

TEST(Config, TypeMismatchAndMissingKey) {
    EXPECT_EQ(kind_of([] { config_from_json({{"ohlcv_path", "a"}, {"vol_path", "b"}, {"W", "30"}}); }),
              ErrorKind::config);
    EXPECT_NE(message_of([] { config_from_json({{"ohlcv_path", "a"}}); }).find("vol_path"), std::string::npos);
    EXPECT_EQ(kind_of([] { config_from_json({{"ohlcv_path", "a"}, {"vol_path", "b"}, {"W", 2.5}}); }),
              ErrorKind::config);
}

TEST(Config, DumpRoundTrip) {
    RunConfig c;
    c.ohlcv_path = "x.csv";
    c.vol_path = "y.csv";
    c.fixed_confidence = 0.93;
    c.ablation_horizons = {2, 3, 4};
    const auto j = config_to_json(c);
    EXPECT_EQ(config_to_json(config_from_json(j)), j);
    EXPECT_TRUE(config_to_json(RunConfig{})["fixed_confidence"].is_null());
}

TEST(Config, ValidationFailures) {
    RunConfig c;
    c.ohlcv_path = "/nonexistent/a.csv";
    c.vol_path = "/nonexistent/b.csv";
    c.validate(false);
    EXPECT_EQ(kind_of([&] { c.validate(true); }), ErrorKind::config);
    c.train_end = "2016-01-01";
    EXPECT_EQ(kind_of([&] { c.validate(false); }), ErrorKind::config);
    c = RunConfig{};
    c.n_critic = 0;
    EXPECT_EQ(kind_of([&] { c.validate(false); }), ErrorKind::config);
}

TEST(ExitCodes, Mapping) {
    EXPECT_EQ(exit_code(ErrorKind::config), 2);
    EXPECT_EQ(exit_code(ErrorKind::missing_artifact), 3);
    EXPECT_EQ(exit_code(ErrorKind::parse), 4);
    EXPECT_EQ(exit_code(ErrorKind::alignment), 4);
    EXPECT_EQ(exit_code(ErrorKind::divergence), 5);
}

// --- plot --------------------------------------------------------------------

namespace {

std::vector<IntervalRecord> ten_days() {
    std::vector<IntervalRecord> rows;
    for (int i = 0; i < 10; ++i) {
        const double mid = 100.0 + i;
        rows.push_back({Date(2022, 5, 2).plus_days(i), mid - 2, mid + 2, 0.95, mid, mid + 0.5});
    }
    return rows;
}

}  // namespace

TEST(Plot, StructuralContract) {
    const std::string svg = render_svg(ten_days());
    EXPECT_EQ(count(svg, "<polygon"), 1u);
    EXPECT_EQ(count(svg, "<polyline"), 2u);
    EXPECT_NE(svg.find(">Date<"), std::string::npos);
    EXPECT_NE(svg.find(">Price<"), std::string::npos);
    EXPECT_NE(svg.find("2022-05-02"), std::string::npos);
}

TEST(Plot, ZeroWidthBandCoincidesWithPointLine) {
    auto rows = ten_days();
    for (auto& r : rows) r.lower = r.upper = r.point;
    const std::string svg = render_svg(rows);
    const std::string band = attribute_points(svg, "band");
    const std::string point = attribute_points(svg, "point");
    EXPECT_EQ(band.substr(0, point.size()), point);
}

TEST(Plot, Errors) {
    EXPECT_EQ(kind_of([] { render_svg({}); }), ErrorKind::plot);
    auto rows = ten_days();
    std::swap(rows[3].lower, rows[3].upper);
    EXPECT_EQ(kind_of([&] { render_svg(rows); }), ErrorKind::plot);
}
