#pragma once

// Risk module: exponential attention on volatility features above a
// threshold, softmax-normalized over time, applied with a residual
// connection and layer normalization.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ragic/error.hpp"

namespace ragic {

/// Per-feature threshold and growth coefficient, broadcast over the window.
/// Entries of non-volatility columns are ignored.
struct RiskParams {
    Eigen::VectorXd delta;
    Eigen::VectorXd lambda;
    std::vector<bool> volatility_mask;

    std::size_t features() const { return volatility_mask.size(); }

    void validate() const {
        const auto K = static_cast<Eigen::Index>(volatility_mask.size());
        if (delta.size() != K || lambda.size() != K) {
            fail(ErrorKind::configuration, "risk params: delta/lambda length must equal the feature count");
        }
        for (Eigen::Index k = 0; k < K; ++k) {
            if (volatility_mask[static_cast<std::size_t>(k)] && !(lambda(k) > 0)) {
                fail(ErrorKind::configuration, "risk params: lambda must be positive on volatility columns");
            }
        }
    }
};

inline constexpr double kLayerNormEps = 1e-5;

/// beta = exp(lambda * max(0, x - delta)) on volatility columns, 1 elsewhere.
inline Eigen::MatrixXd risk_score(const Eigen::MatrixXd& x, const RiskParams& p) {
    if (static_cast<std::size_t>(x.cols()) != p.features()) {
        fail(ErrorKind::shape, "risk_score: window has " + std::to_string(x.cols()) + " columns, params expect " +
                                   std::to_string(p.features()));
    }
    if (!x.allFinite()) fail(ErrorKind::numeric, "risk_score: non-finite input");
    Eigen::MatrixXd beta = Eigen::MatrixXd::Ones(x.rows(), x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        if (!p.volatility_mask[static_cast<std::size_t>(k)]) continue;
        for (Eigen::Index w = 0; w < x.rows(); ++w) {
            beta(w, k) = std::exp(p.lambda(k) * std::max(0.0, x(w, k) - p.delta(k)));
        }
    }
    return beta;
}

/// Softmax down each column.
inline Eigen::MatrixXd column_softmax(const Eigen::MatrixXd& a) {
    Eigen::MatrixXd out(a.rows(), a.cols());
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const double m = a.col(k).maxCoeff();
        out.col(k) = (a.col(k).array() - m).exp().matrix();
        out.col(k) /= out.col(k).sum();
    }
    return out;
}

struct RiskCache {
    Eigen::MatrixXd x;
    Eigen::MatrixXd beta;
    Eigen::MatrixXd r;
    Eigen::MatrixXd normed;
    Eigen::RowVectorXd inv_std;
};

/// x + LayerNorm_time(softmax_time(beta) * x). `gain` and `bias` have one entry
/// per time step and are shared by all columns.
inline Eigen::MatrixXd risk_enhance(const Eigen::MatrixXd& x, const RiskParams& p, const Eigen::VectorXd& gain,
                                    const Eigen::VectorXd& bias, RiskCache* cache = nullptr) {
    const Eigen::Index W = x.rows();
    if (W < 2) fail(ErrorKind::shape, "risk_enhance: window length must be at least 2");
    if (gain.size() != W || bias.size() != W) fail(ErrorKind::shape, "risk_enhance: layer-norm size mismatch");
    Eigen::MatrixXd beta = risk_score(x, p);
    Eigen::MatrixXd r = column_softmax(beta);
    Eigen::MatrixXd u = r.cwiseProduct(x);
    Eigen::MatrixXd normed(W, x.cols());
    Eigen::RowVectorXd inv_std(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double mu = u.col(k).mean();
        Eigen::VectorXd c = u.col(k).array() - mu;
        const double var = c.squaredNorm() / static_cast<double>(W);
        inv_std(k) = 1.0 / std::sqrt(var + kLayerNormEps);
        normed.col(k) = c * inv_std(k);
    }
    Eigen::MatrixXd out = x + ((normed.array().colwise() * gain.array()).colwise() + bias.array()).matrix();
    if (cache) {
        cache->x = x;
        cache->beta = std::move(beta);
        cache->r = std::move(r);
        cache->normed = std::move(normed);
        cache->inv_std = std::move(inv_std);
    }
    return out;
}

/// Default-initialized layer norm (gain 1, bias 0).
inline Eigen::MatrixXd risk_enhance(const Eigen::MatrixXd& x, const RiskParams& p) {
    return risk_enhance(x, p, Eigen::VectorXd::Ones(x.rows()), Eigen::VectorXd::Zero(x.rows()));
}

/// Reverse pass. Accumulates into grad_gain / grad_bias and returns dL/dx.
inline Eigen::MatrixXd risk_enhance_backward(const Eigen::MatrixXd& grad_out, const RiskParams& p,
                                             const Eigen::VectorXd& gain, const RiskCache& c,
                                             Eigen::VectorXd& grad_gain, Eigen::VectorXd& grad_bias) {
    const Eigen::Index W = grad_out.rows();
    const double inv_w = 1.0 / static_cast<double>(W);
    Eigen::MatrixXd grad_x = grad_out;
    grad_gain += grad_out.cwiseProduct(c.normed).rowwise().sum();
    grad_bias += grad_out.rowwise().sum();
    for (Eigen::Index k = 0; k < grad_out.cols(); ++k) {
        Eigen::VectorXd gn = grad_out.col(k).cwiseProduct(gain);
        const Eigen::VectorXd& n = c.normed.col(k);
        Eigen::VectorXd gu =
            c.inv_std(k) * (gn.array() - gn.mean() - n.array() * (gn.dot(n) * inv_w)).matrix();
        grad_x.col(k) += gu.cwiseProduct(c.r.col(k));
        if (!p.volatility_mask[static_cast<std::size_t>(k)]) continue;
        Eigen::VectorXd gr = gu.cwiseProduct(c.x.col(k));
        Eigen::VectorXd gb = c.r.col(k).cwiseProduct((gr.array() - gr.dot(c.r.col(k))).matrix());
        for (Eigen::Index w = 0; w < W; ++w) {
            if (c.x(w, k) > p.delta(k)) grad_x(w, k) += gb(w) * p.lambda(k) * c.beta(w, k);
        }
    }
    return grad_x;
}

}  // namespace ragic
