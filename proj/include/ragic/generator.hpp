#pragma once

// Generator: risk module -> noise channel -> positional encoding ->
// multi-head attention -> dilated causal TCN -> linear head on the last
// time step, producing H future close returns.

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ragic/error.hpp"
#include "ragic/layers.hpp"
#include "ragic/risk_attention.hpp"
#include "ragic/rng.hpp"

namespace ragic {

struct GeneratorConfig {
    int window = 30;
    int features = 14;
    int horizon = 5;
    int heads = 2;
    int head_dim = 8;
    int tcn_layers = 2;
    int kernel_size = 5;
    int tcn_hidden = 100;
    bool use_risk_module = true;
    bool use_temporal_module = true;

    /// Feature columns plus the appended noise channel.
    int channels() const { return features + 1; }

    void validate() const {
        if (window < 2 || features < 1 || horizon < 1 || heads < 1 || head_dim < 1 || tcn_layers < 1 ||
            kernel_size < 1 || tcn_hidden < 1) {
            fail(ErrorKind::configuration, "generator config: all sizes must be positive (window >= 2)");
        }
    }

    bool operator==(const GeneratorConfig&) const = default;
};

/// Uniform noise on [-1, 1], one value per time step.
inline Vector sample_noise(Rng& rng, int W) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector z(W);
    for (int i = 0; i < W; ++i) z(i) = dist(rng);
    return z;
}

struct GeneratorParams {
    GeneratorConfig config;
    RiskParams risk;           // tuned hyperparameters, not trained
    Vector ln_gain, ln_bias;   // risk-module layer norm, one entry per time step
    AttentionParams attention;
    TcnParams tcn;
    Matrix head_w;             // H x hidden
    Vector head_b;             // H
    Matrix flat_w;             // H x (W*C), only without the temporal module
    Vector flat_b;

    static GeneratorParams init(const GeneratorConfig& cfg, RiskParams risk, Rng& rng) {
        cfg.validate();
        risk.validate();
        if (static_cast<int>(risk.features()) != cfg.features) {
            fail(ErrorKind::configuration, "generator: risk params feature count mismatch");
        }
        GeneratorParams p;
        p.config = cfg;
        p.risk = std::move(risk);
        const Eigen::Index C = cfg.channels();
        if (cfg.use_risk_module) {
            p.ln_gain = Vector::Ones(cfg.window);
            p.ln_bias = Vector::Zero(cfg.window);
        }
        if (cfg.use_temporal_module) {
            p.attention = AttentionParams::init(C, cfg.heads, cfg.head_dim, rng);
            p.tcn = TcnParams::init(C, cfg.tcn_hidden, cfg.tcn_layers, cfg.kernel_size, rng);
            const double b = 1.0 / std::sqrt(static_cast<double>(cfg.tcn_hidden));
            p.head_w = uniform_matrix(cfg.horizon, cfg.tcn_hidden, b, rng);
            p.head_b = uniform_matrix(cfg.horizon, 1, b, rng);
        } else {
            const double b = 1.0 / std::sqrt(static_cast<double>(cfg.window * C));
            p.flat_w = uniform_matrix(cfg.horizon, cfg.window * C, b, rng);
            p.flat_b = uniform_matrix(cfg.horizon, 1, b, rng);
        }
        return p;
    }

    /// Calls f(name, tensor) for every trainable tensor, in a fixed order.
    template <class F>
    void for_each(F&& f) { visit(*this, f); }
    template <class F>
    void for_each(F&& f) const { visit(*this, f); }

    /// Same structure with every trainable tensor zeroed.
    GeneratorParams zeros_like() const {
        GeneratorParams z = *this;
        z.for_each([](const std::string&, auto& t) { t.setZero(); });
        return z;
    }

private:
    template <class Self, class F>
    static void visit(Self& self, F& f) {
        if (self.config.use_risk_module) {
            f("risk.ln_gain", self.ln_gain);
            f("risk.ln_bias", self.ln_bias);
        }
        if (self.config.use_temporal_module) {
            AttentionParams::visit(self.attention, "attention.", f);
            TcnParams::visit(self.tcn, "tcn.", f);
            f("head.w", self.head_w);
            f("head.b", self.head_b);
        } else {
            f("flat.w", self.flat_w);
            f("flat.b", self.flat_b);
        }
    }
};

struct GeneratorCache {
    RiskCache risk;
    Matrix input;  // [x_tilde | z] + PE (or without PE for the flat variant)
    AttentionCache attention;
    TcnCache tcn;
    Matrix hidden;
};

inline Vector generator_forward(const Matrix& x, const Vector& z, const GeneratorParams& p,
                                GeneratorCache* cache = nullptr) {
    const auto& cfg = p.config;
    if (x.rows() != cfg.window || x.cols() != cfg.features || z.size() != cfg.window) {
        fail(ErrorKind::configuration, "generator: expected a " + std::to_string(cfg.window) + "x" +
                                           std::to_string(cfg.features) + " window and noise of length " +
                                           std::to_string(cfg.window));
    }
    if (!x.allFinite()) fail(ErrorKind::numeric, "generator: non-finite input window");
    const Eigen::Index C = cfg.channels();
    Matrix a(cfg.window, C);
    if (cfg.use_risk_module) {
        a.leftCols(cfg.features) = risk_enhance(x, p.risk, p.ln_gain, p.ln_bias, cache ? &cache->risk : nullptr);
    } else {
        a.leftCols(cfg.features) = x;
    }
    a.col(cfg.features) = z;
    Vector y;
    if (cfg.use_temporal_module) {
        a += positional_encoding(cfg.window, C);
        Matrix s = multi_head_attention(a, p.attention, cache ? &cache->attention : nullptr);
        Matrix h = tcn_forward(s, p.tcn, cache ? &cache->tcn : nullptr);
        y = p.head_w * h.row(cfg.window - 1).transpose() + p.head_b;
        if (cache) cache->hidden = std::move(h);
    } else {
        Eigen::Map<const Vector> flat(a.data(), a.size());
        y = p.flat_w * flat + p.flat_b;
    }
    if (cache) cache->input = std::move(a);
    return y;
}

/// Reverse pass from dL/dy. Accumulates parameter gradients into `grad` and
/// returns dL/dx.
inline Matrix generator_backward(const Vector& grad_y, const GeneratorParams& p, const GeneratorCache& c,
                                 GeneratorParams& grad) {
    const auto& cfg = p.config;
    Matrix grad_a;
    if (cfg.use_temporal_module) {
        Matrix grad_h = Matrix::Zero(c.hidden.rows(), c.hidden.cols());
        grad_h.row(cfg.window - 1) = (p.head_w.transpose() * grad_y).transpose();
        grad.head_w.noalias() += grad_y * c.hidden.row(cfg.window - 1);
        grad.head_b += grad_y;
        Matrix grad_s = tcn_backward(grad_h, p.tcn, c.tcn, grad.tcn);
        grad_a = multi_head_attention_backward(grad_s, p.attention, c.attention, grad.attention);
    } else {
        Eigen::Map<const Vector> flat(c.input.data(), c.input.size());
        grad.flat_w.noalias() += grad_y * flat.transpose();
        grad.flat_b += grad_y;
        Vector g = p.flat_w.transpose() * grad_y;
        grad_a = Eigen::Map<const Matrix>(g.data(), c.input.rows(), c.input.cols());
    }
    Matrix grad_xt = grad_a.leftCols(cfg.features);
    if (!cfg.use_risk_module) return grad_xt;
    return risk_enhance_backward(grad_xt, p.risk, p.ln_gain, c.risk, grad.ln_gain, grad.ln_bias);
}

}  // namespace ragic
