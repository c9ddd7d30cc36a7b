#pragma once

// Differentiable building blocks of the generator's temporal module:
// sinusoidal positional encoding, multi-head self-attention and dilated
// causal convolution layers. Every layer has an explicit reverse pass.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ragic/error.hpp"
#include "ragic/rng.hpp"

namespace ragic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

inline Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
}

/// PE(w, 2i) = sin(w / 10000^(2i/K)), PE(w, 2i+1) = cos(w / 10000^(2i/K)).
inline Matrix positional_encoding(Eigen::Index W, Eigen::Index K) {
    if (K < 2) fail(ErrorKind::shape, "positional_encoding: need at least 2 channels");
    Matrix pe(W, K);
    for (Eigen::Index w = 0; w < W; ++w) {
        for (Eigen::Index c = 0; c < K; ++c) {
            const Eigen::Index pair = c - (c % 2);
            const double angle = static_cast<double>(w) /
                                 std::pow(10000.0, static_cast<double>(pair) / static_cast<double>(K));
            pe(w, c) = (c % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return pe;
}

/// Softmax along each row.
inline Matrix row_softmax(const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double m = a.row(i).maxCoeff();
        out.row(i) = (a.row(i).array() - m).exp().matrix();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multi-head attention with residual: s = x + [o_1 .. o_D] Wo,
// o_d = softmax(q_d k_d^T / sqrt(d_k)) v_d.

struct AttentionParams {
    std::vector<Matrix> wq, wk, wv;  // each C x d_k
    Matrix wo;                       // D*d_k x C

    int heads() const { return static_cast<int>(wq.size()); }
    Eigen::Index head_dim() const { return wq.empty() ? 0 : wq.front().cols(); }

    static AttentionParams init(Eigen::Index channels, int heads, Eigen::Index head_dim, Rng& rng) {
        AttentionParams p;
        const double b_in = 1.0 / std::sqrt(static_cast<double>(channels));
        for (int d = 0; d < heads; ++d) {
            p.wq.push_back(uniform_matrix(channels, head_dim, b_in, rng));
            p.wk.push_back(uniform_matrix(channels, head_dim, b_in, rng));
            p.wv.push_back(uniform_matrix(channels, head_dim, b_in, rng));
        }
        p.wo = uniform_matrix(heads * head_dim, channels,
                              1.0 / std::sqrt(static_cast<double>(heads * head_dim)), rng);
        return p;
    }

    template <class Self, class F>
    static void visit(Self& self, const std::string& prefix, F&& f) {
        for (std::size_t d = 0; d < self.wq.size(); ++d) {
            const std::string h = prefix + "head" + std::to_string(d) + ".";
            f(h + "wq", self.wq[d]);
            f(h + "wk", self.wk[d]);
            f(h + "wv", self.wv[d]);
        }
        f(prefix + "wo", self.wo);
    }
};

struct AttentionCache {
    Matrix x;
    std::vector<Matrix> q, k, v, probs;
    Matrix concat;
};

inline Matrix multi_head_attention(const Matrix& x, const AttentionParams& p, AttentionCache* cache = nullptr) {
    const int D = p.heads();
    const Eigen::Index dk = p.head_dim();
    if (D < 1 || p.wq.front().rows() != x.cols() || p.wo.cols() != x.cols() || p.wo.rows() != D * dk) {
        fail(ErrorKind::configuration, "attention: parameter shapes do not match input width");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    Matrix concat(x.rows(), D * dk);
    if (cache) {
        cache->x = x;
        cache->q.resize(D);
        cache->k.resize(D);
        cache->v.resize(D);
        cache->probs.resize(D);
    }
    for (int d = 0; d < D; ++d) {
        Matrix q = x * p.wq[d];
        Matrix k = x * p.wk[d];
        Matrix v = x * p.wv[d];
        Matrix probs = row_softmax((q * k.transpose()) * scale);
        concat.middleCols(d * dk, dk) = probs * v;
        if (cache) {
            cache->q[d] = std::move(q);
            cache->k[d] = std::move(k);
            cache->v[d] = std::move(v);
            cache->probs[d] = std::move(probs);
        }
    }
    Matrix s = x + concat * p.wo;
    if (!s.allFinite()) fail(ErrorKind::numeric, "attention: non-finite activations");
    if (cache) cache->concat = std::move(concat);
    return s;
}

inline Matrix multi_head_attention_backward(const Matrix& grad_s, const AttentionParams& p,
                                            const AttentionCache& c, AttentionParams& grad) {
    const int D = p.heads();
    const Eigen::Index dk = p.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    grad.wo.noalias() += c.concat.transpose() * grad_s;
    Matrix grad_concat = grad_s * p.wo.transpose();
    Matrix grad_x = grad_s;
    for (int d = 0; d < D; ++d) {
        const Matrix go = grad_concat.middleCols(d * dk, dk);
        const Matrix& P = c.probs[d];
        Matrix gp = go * c.v[d].transpose();
        Matrix gv = P.transpose() * go;
        Vector row_dot = gp.cwiseProduct(P).rowwise().sum();
        Matrix gphi = P.cwiseProduct((gp.colwise() - row_dot)) * scale;
        Matrix gq = gphi * c.k[d];
        Matrix gk = gphi.transpose() * c.q[d];
        grad.wq[d].noalias() += c.x.transpose() * gq;
        grad.wk[d].noalias() += c.x.transpose() * gk;
        grad.wv[d].noalias() += c.x.transpose() * gv;
        grad_x.noalias() += gq * p.wq[d].transpose();
        grad_x.noalias() += gk * p.wk[d].transpose();
        grad_x.noalias() += gv * p.wv[d].transpose();
    }
    return grad_x;
}

// ---------------------------------------------------------------------------
// Dilated causal convolution layer:
//   out = relu(conv_dilated(h) + b + residual(h))
// with a weight-normalized kernel (each output channel's kernel is
// g_o * v_o / |v_o|) and a 1x1 projection on the residual path when the
// channel count changes. Tap m reads position w - m * dilation; positions
// before the window start are zero.

struct TcnLayerParams {
    Matrix v;      // out x (kernel * in), column m*in + c is tap m, input channel c
    Vector g;      // out
    Vector b;      // out
    Matrix res_w;  // out x in, empty when in == out
    Vector res_b;  // out, empty when in == out
    int dilation = 1;

    Eigen::Index out_channels() const { return v.rows(); }
    Eigen::Index in_channels() const { return kernel() == 0 ? 0 : v.cols() / kernel(); }
    Eigen::Index kernel() const { return kernel_size; }
    bool has_projection() const { return res_w.size() > 0; }

    Eigen::Index kernel_size = 0;

    static TcnLayerParams init(Eigen::Index in, Eigen::Index out, Eigen::Index kernel, int dilation, Rng& rng) {
        TcnLayerParams p;
        p.kernel_size = kernel;
        p.dilation = dilation;
        p.v = normal_matrix(out, kernel * in, 0.01, rng);
        p.g = p.v.rowwise().norm();
        p.b = uniform_matrix(out, 1, 1.0 / std::sqrt(static_cast<double>(kernel * in)), rng);
        if (in != out) {
            p.res_w = normal_matrix(out, in, 0.01, rng);
            p.res_b = uniform_matrix(out, 1, 1.0 / std::sqrt(static_cast<double>(in)), rng);
        }
        return p;
    }

    /// Effective kernel g * v / |v| per output row.
    Matrix effective_kernel() const {
        Vector norms = v.rowwise().norm();
        Matrix w = v;
        for (Eigen::Index o = 0; o < v.rows(); ++o) {
            w.row(o) *= (norms(o) > 0.0 ? g(o) / norms(o) : 0.0);
        }
        return w;
    }

    template <class Self, class F>
    static void visit(Self& self, const std::string& prefix, F&& f) {
        f(prefix + "weight_v", self.v);
        f(prefix + "weight_g", self.g);
        f(prefix + "bias", self.b);
        if (self.res_w.size() > 0) {
            f(prefix + "res_w", self.res_w);
            f(prefix + "res_b", self.res_b);
        }
    }
};

struct TcnLayerCache {
    Matrix input;
    Matrix kernel;        // effective kernel used in the forward pass
    Matrix active;        // 1 where the pre-activation was positive
};

/// Causal dilated convolution of h (W x in) with kernel (out x kernel*in).
inline Matrix causal_conv(const Matrix& h, const Matrix& kernel, Eigen::Index taps, int dilation) {
    const Eigen::Index W = h.rows();
    const Eigen::Index in = h.cols();
    Matrix out = Matrix::Zero(W, kernel.rows());
    for (Eigen::Index m = 0; m < taps; ++m) {
        const Eigen::Index shift = m * dilation;
        if (shift >= W) break;
        out.bottomRows(W - shift).noalias() +=
            h.topRows(W - shift) * kernel.middleCols(m * in, in).transpose();
    }
    return out;
}

inline Matrix tcn_layer_forward(const Matrix& h, const TcnLayerParams& p, TcnLayerCache* cache = nullptr) {
    if (h.cols() != p.in_channels()) fail(ErrorKind::configuration, "tcn: input width mismatch");
    Matrix kernel = p.effective_kernel();
    Matrix pre = causal_conv(h, kernel, p.kernel(), p.dilation);
    pre.rowwise() += p.b.transpose();
    if (p.has_projection()) {
        pre.noalias() += h * p.res_w.transpose();
        pre.rowwise() += p.res_b.transpose();
    } else {
        pre += h;
    }
    Matrix active = (pre.array() > 0.0).cast<double>();
    Matrix out = pre.cwiseProduct(active);
    if (cache) {
        cache->input = h;
        cache->kernel = std::move(kernel);
        cache->active = std::move(active);
    }
    return out;
}

inline Matrix tcn_layer_backward(const Matrix& grad_out, const TcnLayerParams& p, const TcnLayerCache& c,
                                 TcnLayerParams& grad) {
    const Eigen::Index W = grad_out.rows();
    const Eigen::Index in = p.in_channels();
    Matrix gz = grad_out.cwiseProduct(c.active);
    grad.b += gz.colwise().sum().transpose();
    Matrix grad_h = Matrix::Zero(W, in);
    Matrix grad_kernel = Matrix::Zero(c.kernel.rows(), c.kernel.cols());
    for (Eigen::Index m = 0; m < p.kernel(); ++m) {
        const Eigen::Index shift = m * p.dilation;
        if (shift >= W) break;
        grad_kernel.middleCols(m * in, in).noalias() +=
            gz.bottomRows(W - shift).transpose() * c.input.topRows(W - shift);
        grad_h.topRows(W - shift).noalias() += gz.bottomRows(W - shift) * c.kernel.middleCols(m * in, in);
    }
    if (p.has_projection()) {
        grad.res_w.noalias() += gz.transpose() * c.input;
        grad.res_b += gz.colwise().sum().transpose();
        grad_h.noalias() += gz * p.res_w;
    } else {
        grad_h += gz;
    }
    // weight norm: w = g v / |v|
    for (Eigen::Index o = 0; o < p.v.rows(); ++o) {
        const double norm = p.v.row(o).norm();
        if (norm == 0.0) continue;
        const auto vhat = p.v.row(o) / norm;
        const double proj = grad_kernel.row(o).dot(vhat);
        grad.g(o) += proj;
        grad.v.row(o) += (p.g(o) / norm) * (grad_kernel.row(o) - proj * vhat);
    }
    return grad_h;
}

/// Stack of TCN layers; layer l (1-based) has dilation 2^(l-1).
struct TcnParams {
    std::vector<TcnLayerParams> layers;

    static TcnParams init(Eigen::Index in, Eigen::Index hidden, int num_layers, Eigen::Index kernel, Rng& rng) {
        TcnParams p;
        for (int l = 0; l < num_layers; ++l) {
            p.layers.push_back(TcnLayerParams::init(l == 0 ? in : hidden, hidden, kernel, 1 << l, rng));
        }
        return p;
    }

    Eigen::Index hidden() const { return layers.empty() ? 0 : layers.back().out_channels(); }

    /// 1 + (p - 1) * (2^L - 1).
    Eigen::Index receptive_field() const {
        if (layers.empty()) return 1;
        return 1 + (layers.front().kernel() - 1) * ((Eigen::Index{1} << layers.size()) - 1);
    }

    template <class Self, class F>
    static void visit(Self& self, const std::string& prefix, F&& f) {
        for (std::size_t l = 0; l < self.layers.size(); ++l) {
            TcnLayerParams::visit(self.layers[l], prefix + "layer" + std::to_string(l) + ".", f);
        }
    }
};

struct TcnCache {
    std::vector<TcnLayerCache> layers;
};

inline Matrix tcn_forward(const Matrix& s, const TcnParams& p, TcnCache* cache = nullptr) {
    if (cache) cache->layers.resize(p.layers.size());
    Matrix h = s;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        h = tcn_layer_forward(h, p.layers[l], cache ? &cache->layers[l] : nullptr);
    }
    return h;
}

inline Matrix tcn_backward(const Matrix& grad_out, const TcnParams& p, const TcnCache& c, TcnParams& grad) {
    Matrix g = grad_out;
    for (std::size_t l = p.layers.size(); l-- > 0;) {
        g = tcn_layer_backward(g, p.layers[l], c.layers[l], grad.layers[l]);
    }
    return g;
}

}  // namespace ragic
