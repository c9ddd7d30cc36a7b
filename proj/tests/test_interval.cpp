#include <random>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
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

double boost_t_quantile(double p, double dof) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

// Returns (0.001 * last feature value + 0.01 * z0, -0.002)
Vector stub_generator(const Matrix& x, const Vector& z) {
    Vector r(2);
    r << 0.001 * x(x.rows() - 1, 0) + 0.01 * z(0), -0.002;
    return r;
}

}  // namespace

TEST(Prices, FromReturns) {
    Vector r(2);
    r << 0.01, -0.01;
    const Vector p = returns_to_prices(100.0, r);
    EXPECT_NEAR(p(0), 101.0, 1e-12);
    EXPECT_NEAR(p(1), 99.99, 1e-12);
    r(1) = -1.0;
    EXPECT_EQ(kind_of([&] { returns_to_prices(100.0, r); }), ErrorKind::invalid_return);
}

TEST(Simulate, EnsembleSizeIsNTimesH) {
    const auto t = fixtures::toy_table(60, [](std::size_t i) { return 100.0 + i; });
    auto gen = [](const Matrix&, const Vector&) { return Vector::Constant(5, 0.001); };
    const auto e = simulate_horizon(gen, t, 50, 50, 30, 5, 1);
    EXPECT_EQ(e.size(), 250u);
    EXPECT_EQ(e.anchor_closes.size(), 5u);
    for (int j = 1; j <= 5; ++j) {
        EXPECT_EQ(std::count(e.offset.begin(), e.offset.end(), j), 50);
    }
}

TEST(Simulate, StubToyMatchesBruteForce) {
    const auto t = fixtures::toy_table(12, [](std::size_t i) { return 50.0 + 3.0 * i; });
    const std::size_t target = 9;
    const int W = 3, H = 2, N = 1;
    const std::uint64_t seed = 77;
    const auto e = simulate_horizon(stub_generator, t, target, N, W, H, seed);
    ASSERT_EQ(e.size(), 2u);
    std::size_t k = 0;
    for (int j = H; j >= 1; --j) {
        const std::size_t end = target - static_cast<std::size_t>(j);
        Rng rng(mix_seed(seed, target, static_cast<std::uint64_t>(j), 1));
        const Vector z = sample_noise(rng, W);
        const double r1 = 0.001 * static_cast<double>(end) + 0.01 * z(0);
        const double r2 = -0.002;
        const double anchor = 50.0 + 3.0 * static_cast<double>(end);
        const double want = j == 1 ? anchor * (1 + r1) : anchor * (1 + r1) * (1 + r2);
        EXPECT_NEAR(e.values[k], want, 1e-12);
        EXPECT_EQ(e.offset[k], j);
        EXPECT_EQ(e.draw[k], 1);
        EXPECT_DOUBLE_EQ(e.anchor_closes[static_cast<std::size_t>(j - 1)], anchor);
        ++k;
    }
}

TEST(Simulate, SameSeedSameEnsemble) {
    const auto t = fixtures::toy_table(20, [](std::size_t i) { return 10.0 + i; });
    const auto a = simulate_horizon(stub_generator, t, 15, 4, 3, 2, 5);
    const auto b = simulate_horizon(stub_generator, t, 15, 4, 3, 2, 5);
    const auto c = simulate_horizon(stub_generator, t, 15, 4, 3, 2, 6);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
}

TEST(Simulate, TargetPastTableEndIsAllowed) {
    const auto t = fixtures::toy_table(10, [](std::size_t i) { return 10.0 + i; });
    const auto e = simulate_horizon(stub_generator, t, 10, 2, 3, 2, 5);
    EXPECT_FALSE(e.target_date.has_value());
    EXPECT_EQ(kind_of([&] { simulate_horizon(stub_generator, t, 11, 2, 3, 2, 5); }), ErrorKind::coverage_gap);
    EXPECT_EQ(kind_of([&] { simulate_horizon(stub_generator, t, 3, 2, 3, 2, 5); }), ErrorKind::coverage_gap);
}

TEST(Stats, HandExamples) {
    const auto s = sample_stats({1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.variance, 1.0);
    EXPECT_DOUBLE_EQ(sample_stats({4.0, 4.0, 4.0}).variance, 0.0);
    const auto shifted = sample_stats({11.0, 12.0, 13.0});
    EXPECT_DOUBLE_EQ(shifted.mean, 12.0);
    EXPECT_NEAR(shifted.variance, 1.0, 1e-12);
    EXPECT_EQ(kind_of([] { sample_stats(std::vector<double>{1.0}); }), ErrorKind::degenerate_ensemble);
}

TEST(Confidence, EndpointsAndMidpoint) {
    const SigmoidConfig cfg;
    EXPECT_NEAR(confidence(10.0, cfg), 0.9001, 1e-6);
    EXPECT_NEAR(confidence(16.0, cfg), 0.9495, 1e-6);
    EXPECT_NEAR(confidence(22.0, cfg), 0.9989, 1e-6);
    double prev = 0.0;
    for (double v = 0.0; v < 40.0; v += 0.5) {  // saturates to c_u in double beyond ~50
        const double c = confidence(v, cfg);
        EXPECT_GT(c, prev);
        EXPECT_GT(c, 0.90);
        EXPECT_LT(c, 0.999);
        prev = c;
    }
}

TEST(Confidence, InvalidConfig) {
    SigmoidConfig bad;
    bad.v_u = bad.v_l;
    EXPECT_EQ(kind_of([&] { bad.validate(); }), ErrorKind::config);
    bad = {};
    bad.delta_eps = 0.2;
    EXPECT_EQ(kind_of([&] { bad.validate(); }), ErrorKind::config);
}

TEST(StudentT, MatchesBoost) {
    for (double dof : {1.0, 2.0, 3.0, 5.0, 10.0, 29.0, 249.0, 1e4, 1e6}) {
        for (double p : {0.55, 0.75, 0.9, 0.95, 0.975, 0.995, 0.9995}) {
            const double want = boost_t_quantile(p, dof);
            EXPECT_NEAR(t_quantile(p, dof), want, 1e-8 * std::max(1.0, std::fabs(want))) << p << " " << dof;
            EXPECT_NEAR(t_quantile(1.0 - p, dof), -want, 1e-8 * std::max(1.0, std::fabs(want)));
        }
    }
}

TEST(StudentT, PinnedValues) {
    EXPECT_NEAR(t_quantile(0.975, 249), 1.9695368676395824, 1e-8);
    EXPECT_NEAR(t_quantile(0.975, 1e6), 1.9599663568141066, 1e-8);
    EXPECT_DOUBLE_EQ(t_quantile(0.5, 7), 0.0);
    EXPECT_EQ(kind_of([] { t_quantile(1.0, 5); }), ErrorKind::out_of_range);
    EXPECT_EQ(kind_of([] { t_quantile(0.9, 0); }), ErrorKind::out_of_range);
}

TEST(BuildInterval, PinnedExample) {
    // 250 values with sample mean exactly 100 and sample std exactly 2
    std::vector<double> v;
    for (int i = 0; i < 125; ++i) {
        v.push_back(-1.0);
        v.push_back(1.0);
    }
    const double scale = 2.0 / std::sqrt(250.0 / 249.0);
    for (double& x : v) x = 100.0 + scale * x;
    const auto iv = build_interval(v, 0.95, 100.0);
    EXPECT_NEAR(iv.lower, 96.05305597968074, 1e-8);
    EXPECT_NEAR(iv.upper, 103.94694402031926, 1e-8);
}

TEST(BuildInterval, ZeroSpreadAndNesting) {
    const auto flat = build_interval(std::vector<double>(10, 42.0), 0.95, 42.0);
    EXPECT_DOUBLE_EQ(flat.lower, 42.0);
    EXPECT_DOUBLE_EQ(flat.upper, 42.0);
    const std::vector<double> v = {1.0, 3.0, 2.5, 4.0, 0.5};
    double last_width = 0.0;
    double last_lo = 1e9, last_hi = -1e9;
    for (double c : {0.5, 0.8, 0.9, 0.95, 0.99, 0.999}) {
        const auto iv = build_interval(v, c, 2.0);
        EXPECT_GT(iv.upper - iv.lower, last_width);
        EXPECT_LT(iv.lower, last_lo);
        EXPECT_GT(iv.upper, last_hi);
        last_width = iv.upper - iv.lower;
        last_lo = iv.lower;
        last_hi = iv.upper;
    }
}

TEST(PointPredict, WeightedHorizonMean) {
    Vector p(2);
    p << 10.0, 20.0;
    EXPECT_NEAR(point_predict({p}), 13.333333333333334, 1e-12);
    EXPECT_NEAR(point_predict({Vector::Constant(5, 7.5)}), 7.5, 1e-12);
    Vector q(2);
    q << 30.0, 12.0;
    const double two = point_predict({p, q});
    EXPECT_NEAR(point_predict({p, q, p, q}), two, 1e-12);
    EXPECT_GE(two, 10.0);
    EXPECT_LE(two, 30.0);
}

TEST(BuildInterval, EnsembleOverloadCarriesDateAndPoint) {
    const auto t = fixtures::toy_table(20, [](std::size_t i) { return 10.0 + i; });
    const auto e = simulate_horizon(stub_generator, t, 15, 6, 3, 2, 5);
    const auto iv = build_interval(e, 0.9);
    EXPECT_EQ(*iv.target_date, t.dates[15]);
    EXPECT_NEAR(iv.point, point_predict(e.prediction_vectors()), 0.0);
    EXPECT_LT(iv.lower, iv.upper);
}

TEST(Calibration, QuickCoverageCheck) {
    Rng rng(99);
    std::normal_distribution<double> g(3.0, 1.5);
    std::vector<double> v(250);
    int hits = 0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
        for (double& x : v) x = g(rng);
        const auto iv = build_interval(v, 0.95, 0.0);
        const double truth = g(rng);
        hits += truth >= iv.lower && truth <= iv.upper;
    }
    EXPECT_NEAR(hits / double(trials), 0.95, 0.01);
}

TEST(IntervalCsv, RoundTripAndMissingActual) {
    std::vector<IntervalRecord> rows = {{Date(2020, 3, 2), 1.0 / 3.0, 2.5, 0.95, 2.0, 2.25},
                                        {Date(2020, 3, 3), 1.5, 2.75, 0.91, 2.1, std::nullopt}};
    std::stringstream s;
    write_interval_csv(s, rows);
    const std::string text = s.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "date,lower,upper,confidence,point,actual_close");
    EXPECT_EQ(text.back(), '\n');
    EXPECT_NE(text.find(",2.1,\n"), std::string::npos);
    const auto back = read_interval_csv(s);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].lower, 1.0 / 3.0);
    EXPECT_EQ(*back[0].actual, 2.25);
    EXPECT_FALSE(back[1].actual.has_value());
}
