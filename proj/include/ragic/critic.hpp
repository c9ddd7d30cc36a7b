#pragma once

// Critic: single-layer GRU scanned over the H-step return sequence, then a
// linear map of the final hidden state to an unbounded score.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ragic/error.hpp"
#include "ragic/layers.hpp"
#include "ragic/rng.hpp"

namespace ragic {

/// Gate blocks are stacked in (reset, update, candidate) order:
///   r = sig(wi_r x + bi_r + wh_r h + bh_r)
///   u = sig(wi_u x + bi_u + wh_u h + bh_u)
///   n = tanh(wi_n x + bi_n + r * (wh_n h + bh_n))
///   h' = (1 - u) * n + u * h
struct CriticParams {
    Vector wi;    // 3H_c (scalar input)
    Matrix wh;    // 3H_c x H_c
    Vector bi;    // 3H_c
    Vector bh;    // 3H_c
    Vector fc_w;  // H_c
    Vector fc_b;  // 1

    Eigen::Index hidden() const { return wh.cols(); }

    static CriticParams init(int hidden, Rng& rng) {
        if (hidden < 1) fail(ErrorKind::configuration, "critic: hidden size must be positive");
        const double b = 1.0 / std::sqrt(static_cast<double>(hidden));
        CriticParams p;
        p.wi = uniform_matrix(3 * hidden, 1, b, rng);
        p.wh = uniform_matrix(3 * hidden, hidden, b, rng);
        p.bi = uniform_matrix(3 * hidden, 1, b, rng);
        p.bh = uniform_matrix(3 * hidden, 1, b, rng);
        p.fc_w = uniform_matrix(hidden, 1, b, rng);
        p.fc_b = uniform_matrix(1, 1, b, rng);
        return p;
    }

    template <class F>
    void for_each(F&& f) { visit(*this, f); }
    template <class F>
    void for_each(F&& f) const { visit(*this, f); }

    CriticParams zeros_like() const {
        CriticParams z = *this;
        z.for_each([](const std::string&, auto& t) { t.setZero(); });
        return z;
    }

    double max_abs_weight() const {
        double m = 0.0;
        for_each([&](const std::string&, const auto& t) {
            if (t.size() > 0) m = std::max(m, t.cwiseAbs().maxCoeff());
        });
        return m;
    }

private:
    template <class Self, class F>
    static void visit(Self& self, F& f) {
        f("gru.wi", self.wi);
        f("gru.wh", self.wh);
        f("gru.bi", self.bi);
        f("gru.bh", self.bh);
        f("fc.w", self.fc_w);
        f("fc.b", self.fc_b);
    }
};

struct CriticCache {
    Vector input;
    std::vector<Vector> h;   // h[0] = 0, h[t+1] after step t
    std::vector<Vector> r, u, n, gh_n;
};

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

inline double critic_forward(const Vector& y, const CriticParams& p, CriticCache* cache = nullptr) {
    if (y.size() < 1) fail(ErrorKind::shape, "critic: empty sequence");
    const Eigen::Index hc = p.hidden();
    Vector h = Vector::Zero(hc);
    if (cache) {
        cache->input = y;
        cache->h.assign(1, h);
        cache->r.clear();
        cache->u.clear();
        cache->n.clear();
        cache->gh_n.clear();
    }
    for (Eigen::Index t = 0; t < y.size(); ++t) {
        Vector gi = p.wi * y(t) + p.bi;
        Vector gh = p.wh * h + p.bh;
        Vector r = (gi.head(hc) + gh.head(hc)).unaryExpr([](double v) { return sigmoid(v); });
        Vector u = (gi.segment(hc, hc) + gh.segment(hc, hc)).unaryExpr([](double v) { return sigmoid(v); });
        Vector ghn = gh.tail(hc);
        Vector n = (gi.tail(hc) + r.cwiseProduct(ghn)).array().tanh().matrix();
        h = (Vector::Ones(hc) - u).cwiseProduct(n) + u.cwiseProduct(h);
        if (cache) {
            cache->h.push_back(h);
            cache->r.push_back(std::move(r));
            cache->u.push_back(std::move(u));
            cache->n.push_back(std::move(n));
            cache->gh_n.push_back(std::move(ghn));
        }
    }
    return p.fc_w.dot(h) + p.fc_b(0);
}

/// Back-propagation through time for dL/dscore = grad_score. Accumulates into
/// `grad` and returns dL/dy.
inline Vector critic_backward(double grad_score, const CriticParams& p, const CriticCache& c, CriticParams& grad) {
    const Eigen::Index hc = p.hidden();
    const Eigen::Index T = c.input.size();
    Vector grad_y(T);
    grad.fc_w += grad_score * c.h.back();
    grad.fc_b(0) += grad_score;
    Vector dh = grad_score * p.fc_w;
    for (Eigen::Index t = T; t-- > 0;) {
        const Vector& hp = c.h[static_cast<std::size_t>(t)];
        const Vector& r = c.r[static_cast<std::size_t>(t)];
        const Vector& u = c.u[static_cast<std::size_t>(t)];
        const Vector& n = c.n[static_cast<std::size_t>(t)];
        const Vector& ghn = c.gh_n[static_cast<std::size_t>(t)];
        Vector dn = dh.cwiseProduct(Vector::Ones(hc) - u);
        Vector du = dh.cwiseProduct(hp - n);
        Vector dh_prev = dh.cwiseProduct(u);
        Vector dn_pre = dn.array() * (1.0 - n.array().square());
        Vector dr_pre = (dn_pre.cwiseProduct(ghn)).array() * r.array() * (1.0 - r.array());
        Vector du_pre = du.array() * u.array() * (1.0 - u.array());
        Vector dgi(3 * hc);
        dgi << dr_pre, du_pre, dn_pre;
        Vector dgh(3 * hc);
        dgh << dr_pre, du_pre, dn_pre.cwiseProduct(r);
        grad.wi += dgi * c.input(t);
        grad.bi += dgi;
        grad.wh.noalias() += dgh * hp.transpose();
        grad.bh += dgh;
        dh_prev.noalias() += p.wh.transpose() * dgh;
        grad_y(t) = p.wi.dot(dgi);
        dh = std::move(dh_prev);
    }
    return grad_y;
}

}  // namespace ragic
