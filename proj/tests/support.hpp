#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ragic/ragic.hpp"

namespace ragic::fixtures {

/// Worst relative error between an analytic gradient and the central
/// difference of `loss` over every entry of `param`.
inline double max_fd_error(Eigen::MatrixXd& param, const Eigen::MatrixXd& analytic,
                           const std::function<double()>& loss, double h = 1e-6) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < param.size(); ++i) {
        const double keep = param.data()[i];
        param.data()[i] = keep + h;
        const double up = loss();
        param.data()[i] = keep - h;
        const double down = loss();
        param.data()[i] = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic.data()[i];
        const double err = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-4});
        worst = std::max(worst, err);
    }
    return worst;
}

/// Same for a vector-shaped tensor.
inline double max_fd_error(Eigen::VectorXd& param, const Eigen::VectorXd& analytic,
                           const std::function<double()>& loss, double h = 1e-6) {
    Eigen::MatrixXd p = param;
    Eigen::MatrixXd a = analytic;
    const double err = max_fd_error(
        p, a,
        [&]() {
            param = p;
            return loss();
        },
        h);
    param = p;
    return err;
}

/// Worst relative error over every trainable entry of a parameter struct
/// exposing for_each(name, tensor); `grad` must have the same layout.
template <class Params>
double max_param_fd_error(Params& params, const Params& grad, const std::function<double()>& loss,
                          double h = 1e-6) {
    std::vector<std::pair<double*, Eigen::Index>> p;
    std::vector<const double*> g;
    params.for_each([&](const std::string&, auto& t) { p.emplace_back(t.data(), t.size()); });
    grad.for_each([&](const std::string&, const auto& t) { g.push_back(t.data()); });
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (Eigen::Index j = 0; j < p[i].second; ++j) {
            double& x = p[i].first[j];
            const double keep = x;
            x = keep + h;
            const double up = loss();
            x = keep - h;
            const double down = loss();
            x = keep;
            const double numeric = (up - down) / (2.0 * h);
            const double a = g[i][j];
            worst = std::max(worst, std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-4}));
        }
    }
    return worst;
}

/// Overwrites every trainable entry with uniform noise on [-scale, scale].
template <class Params>
void randomize(Params& params, double scale, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    params.for_each([&](const std::string&, auto& t) {
        for (Eigen::Index j = 0; j < t.size(); ++j) t.data()[j] = u(rng);
    });
}

inline RiskParams risk_for(int K, std::vector<int> vol_cols, double delta = 0.1, double lambda = 2.5) {
    RiskParams r;
    r.delta = Eigen::VectorXd::Constant(K, delta);
    r.lambda = Eigen::VectorXd::Constant(K, lambda);
    r.volatility_mask.assign(static_cast<std::size_t>(K), false);
    for (int c : vol_cols) r.volatility_mask[static_cast<std::size_t>(c)] = true;
    return r;
}

/// Tiny generator used by the gradient checks and fast smoke tests.
inline GeneratorConfig tiny_generator(int W = 6, int K = 4, int H = 2) {
    GeneratorConfig g;
    g.window = W;
    g.features = K;
    g.horizon = H;
    g.heads = 1;
    g.head_dim = 3;
    g.tcn_layers = 1;
    g.kernel_size = 2;
    g.tcn_hidden = 3;
    return g;
}

/// Windows cut from a noisy sine wave: x holds W past values (the last
/// column carries a crude volatility proxy), y the next H increments.
inline std::vector<WindowSample> sine_dataset(std::size_t count, int W, int K, int H, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 0.002);
    const std::size_t n = count + static_cast<std::size_t>(W + H);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = 0.02 * std::sin(0.3 * static_cast<double>(i)) + noise(rng);
    std::vector<WindowSample> out;
    for (std::size_t t = static_cast<std::size_t>(W) - 1; out.size() < count; ++t) {
        WindowSample w;
        w.x = Eigen::MatrixXd::Zero(W, K);
        for (int r = 0; r < W; ++r) {
            const double v = s[t + 1 - static_cast<std::size_t>(W) + static_cast<std::size_t>(r)];
            for (int k = 0; k < K; ++k) w.x(r, k) = v * (k + 1) * 10.0;
            w.x(r, K - 1) = std::fabs(v) * 10.0;
        }
        w.y.resize(H);
        for (int h = 0; h < H; ++h) w.y(h) = s[t + 1 + static_cast<std::size_t>(h)];
        w.anchor_index = t;
        out.push_back(std::move(w));
    }
    return out;
}

/// Table with `rows` rows whose close follows `close(i)` and whose other
/// columns are zero; enough for window and simulation tests.
inline FeatureTable toy_table(std::size_t rows, const std::function<double(std::size_t)>& close, int K = 2) {
    FeatureTable t;
    t.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), K);
    for (std::size_t i = 0; i < rows; ++i) {
        t.dates.push_back(Date(2020, 1, 1).plus_days(static_cast<int>(i)));
        t.raw_close.push_back(close(i));
        t.raw_vol.push_back(15.0);
        t.values(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    }
    t.column_names.assign(static_cast<std::size_t>(K), "c");
    t.volatility_mask.assign(static_cast<std::size_t>(K), false);
    return t;
}

/// Joined series of business days with a deterministic but irregular path.
inline JoinedSeries joined_fixture(std::size_t n, std::uint64_t seed = 3) {
    const auto dates = business_days(Date(2020, 1, 6), n);
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-0.02, 0.02);
    JoinedSeries out;
    double c = 100.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double open = c * (1.0 + 0.3 * u(rng));
        c *= 1.0 + u(rng);
        const double high = std::max(open, c) * (1.0 + std::fabs(u(rng)));
        const double low = std::min(open, c) * (1.0 - std::fabs(u(rng)));
        const double volume = 1e6 * (1.0 + 10.0 * std::fabs(u(rng)));
        const double vol = 15.0 + 200.0 * u(rng);
        out.push_back({{dates[i], open, high, low, c, volume}, vol});
    }
    return out;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("ragic_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Small synthetic market with low- then high-volatility regimes, written to
/// `dir`, plus a matching run configuration sized for a quick CLI run.
inline RunConfig small_run(const std::filesystem::path& dir, int days_per_regime = 200) {
    SyntheticMarketSpec spec;
    spec.regimes = {{days_per_regime, 0.006}, {days_per_regime, 0.02}};
    const SyntheticMarket m = make_synthetic_market(spec);
    write_ohlcv_csv((dir / "ohlcv.csv").string(), m.bars);
    write_vol_csv((dir / "vol.csv").string(), m.vols);
    const std::size_t n = m.bars.size();
    RunConfig cfg;
    cfg.ohlcv_path = (dir / "ohlcv.csv").string();
    cfg.vol_path = (dir / "vol.csv").string();
    cfg.train_end = m.bars[n * 6 / 10].date.iso();
    cfg.val_end = m.bars[n * 7 / 10].date.iso();
    cfg.out_dir = (dir / "out").string();
    cfg.W = 10;
    cfg.H = 3;
    cfg.N = 5;
    cfg.epochs = 2;
    cfg.batch_size = 64;
    cfg.tcn_hidden = 8;
    cfg.kernel_size = 3;
    cfg.critic_hidden = 8;
    return cfg;
}

}  // namespace ragic::fixtures
