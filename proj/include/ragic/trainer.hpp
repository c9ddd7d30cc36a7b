#pragma once

// Adversarial training: alternating critic / generator updates of the
// Wasserstein objective, an L1 supervised penalty on the generator and
// weight clipping of the critic after every critic update.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ragic/critic.hpp"
#include "ragic/error.hpp"
#include "ragic/generator.hpp"
#include "ragic/log.hpp"
#include "ragic/market_data.hpp"
#include "ragic/rng.hpp"

namespace ragic {

struct TrainConfig {
    int epochs = 50;
    int batch_size = 150;
    double lr_generator = 1e-4;
    double lr_critic = 3e-4;
    double gamma = 0.3;   // supervised L1 penalty
    double xi = 0.01;     // critic clip threshold
    int n_critic = 5;     // critic updates per generator update
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 1 || batch_size < 1 || !(lr_generator > 0) || !(lr_critic > 0) || !(gamma >= 0) ||
            !(xi > 0) || n_critic < 1) {
            fail(ErrorKind::configuration, "train config: epochs, batch_size, learning rates, xi and n_critic "
                                           "must be positive and gamma non-negative");
        }
    }

    bool operator==(const TrainConfig&) const = default;
};

struct NetworkConfig {
    GeneratorConfig generator;
    int critic_hidden = 32;
};

// ---------------------------------------------------------------------------
// Losses

inline double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// -mean(real) + mean(fake).
inline double critic_loss(const std::vector<double>& real_scores, const std::vector<double>& fake_scores) {
    if (real_scores.empty() || fake_scores.empty()) fail(ErrorKind::batch, "critic_loss: empty batch");
    return -mean_of(real_scores) + mean_of(fake_scores);
}

/// Mean absolute elementwise difference over the whole batch.
inline double supervised_loss(const std::vector<Vector>& y, const std::vector<Vector>& y_hat) {
    if (y.size() != y_hat.size() || y.empty()) fail(ErrorKind::shape, "supervised_loss: batch shape mismatch");
    double total = 0.0;
    Eigen::Index count = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i].size() != y_hat[i].size()) fail(ErrorKind::shape, "supervised_loss: sequence length mismatch");
        total += (y[i] - y_hat[i]).cwiseAbs().sum();
        count += y[i].size();
    }
    return total / static_cast<double>(count);
}

/// -mean(fake) + gamma * L1(y, y_hat).
inline double generator_loss(const std::vector<double>& fake_scores, const std::vector<Vector>& y,
                             const std::vector<Vector>& y_hat, double gamma) {
    if (fake_scores.empty()) fail(ErrorKind::batch, "generator_loss: empty batch");
    return -mean_of(fake_scores) + gamma * supervised_loss(y, y_hat);
}

inline void clip_weights(CriticParams& params, double xi) {
    params.for_each([xi](const std::string&, auto& t) { t = t.cwiseMax(-xi).cwiseMin(xi); });
}

// ---------------------------------------------------------------------------
// Adam over any parameter struct exposing for_each(name, tensor).

template <class Params>
class Adam {
public:
    Adam(const Params& like, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : m_(like.zeros_like()), v_(like.zeros_like()), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(Params& params, const Params& grads) {
        ++t_;
        auto p = views(params);
        auto g = views(const_cast<Params&>(grads));
        auto m = views(m_);
        auto v = views(v_);
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < p.size(); ++i) {
            for (Eigen::Index j = 0; j < p[i].second; ++j) {
                const double gj = g[i].first[j];
                double& mj = m[i].first[j];
                double& vj = v[i].first[j];
                mj = beta1_ * mj + (1.0 - beta1_) * gj;
                vj = beta2_ * vj + (1.0 - beta2_) * gj * gj;
                p[i].first[j] -= lr_ * (mj / c1) / (std::sqrt(vj / c2) + eps_);
            }
        }
    }

    long steps() const { return t_; }

private:
    static std::vector<std::pair<double*, Eigen::Index>> views(Params& params) {
        std::vector<std::pair<double*, Eigen::Index>> out;
        params.for_each([&](const std::string&, auto& t) { out.emplace_back(t.data(), t.size()); });
        return out;
    }

    Params m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

// ---------------------------------------------------------------------------

/// Everything needed to rebuild the forecaster.
struct ModelBundle {
    static constexpr std::uint32_t kFormatVersion = 1;

    GeneratorParams generator;
    CriticParams critic;
    TrainConfig train;
    ScalerState scaler;
    std::vector<std::string> feature_names;
    std::vector<bool> volatility_mask;
    std::uint32_t format_version = kFormatVersion;

    int window() const { return generator.config.window; }
    int horizon() const { return generator.config.horizon; }
};

struct LossRecord {
    int epoch = 0;
    int batch = 0;
    double critic_loss = 0.0;
    double generator_loss = 0.0;
    double supervised_l1 = 0.0;
};

struct EpochSummary {
    int epoch = 0;
    double mean_supervised_l1 = 0.0;
    double validation_l1 = std::nan("");
};

/// Hook for observing the optimization; `generator_step` is false for a
/// critic update (called after clipping) and true for a generator update.
struct StepEvent {
    bool generator_step = false;
    long critic_steps = 0;
    long generator_steps = 0;
    const CriticParams* critic = nullptr;
    const GeneratorParams* generator = nullptr;
};

struct TrainResult {
    ModelBundle bundle;                   // parameters after the last epoch
    std::optional<ModelBundle> best;      // lowest validation L1, when validation data exists
    std::vector<LossRecord> history;
    std::vector<EpochSummary> epochs;
    long critic_steps = 0;
    long generator_steps = 0;
};

namespace detail {

inline double mean_l1(const std::vector<WindowSample>& data, const GeneratorParams& g, std::uint64_t seed) {
    Rng rng(seed);
    double total = 0.0;
    Eigen::Index count = 0;
    for (const auto& s : data) {
        Vector z = sample_noise(rng, g.config.window);
        total += (generator_forward(s.x, z, g) - s.y).cwiseAbs().sum();
        count += s.y.size();
    }
    return total / static_cast<double>(count);
}

inline void check_dataset(const std::vector<WindowSample>& data, const GeneratorConfig& cfg) {
    for (const auto& s : data) {
        if (s.x.rows() != cfg.window || s.x.cols() != cfg.features || s.y.size() != cfg.horizon) {
            fail(ErrorKind::configuration, "train: sample shape does not match the network configuration");
        }
    }
}

}  // namespace detail

inline TrainResult train(const std::vector<WindowSample>& dataset, const std::vector<WindowSample>& validation,
                         const TrainConfig& cfg, const NetworkConfig& net, const RiskParams& risk,
                         const std::function<void(const StepEvent&)>& on_step = {}) {
    cfg.validate();
    if (dataset.empty()) fail(ErrorKind::empty_dataset, "train: empty training set");
    detail::check_dataset(dataset, net.generator);
    detail::check_dataset(validation, net.generator);

    Rng init_rng(substream_seed(cfg.seed, "init"));
    Rng shuffle_rng(substream_seed(cfg.seed, "shuffle"));
    Rng noise_rng(substream_seed(cfg.seed, "noise"));
    const std::uint64_t validation_seed = substream_seed(cfg.seed, "validation");

    TrainResult result;
    GeneratorParams gen = GeneratorParams::init(net.generator, risk, init_rng);
    CriticParams critic = CriticParams::init(net.critic_hidden, init_rng);
    Adam<GeneratorParams> gen_opt(gen, cfg.lr_generator);
    Adam<CriticParams> critic_opt(critic, cfg.lr_critic);

    auto make_bundle = [&]() {
        ModelBundle b;
        b.generator = gen;
        b.critic = critic;
        b.train = cfg;
        b.volatility_mask = risk.volatility_mask;
        return b;
    };

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    const int W = net.generator.window;
    double best_val = std::numeric_limits<double>::infinity();
    long i = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_l1 = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::size_t B = end - start;
            std::vector<Vector> zs, ys, y_hats;
            for (std::size_t b = start; b < end; ++b) {
                const auto& s = dataset[order[b]];
                zs.push_back(sample_noise(noise_rng, W));
                ys.push_back(s.y);
                y_hats.push_back(generator_forward(s.x, zs.back(), gen));
            }

            // critic update on -mean C(y) + mean C(y_hat)
            CriticParams critic_grad = critic.zeros_like();
            std::vector<double> real_scores, fake_scores;
            CriticCache cc;
            for (std::size_t b = 0; b < B; ++b) {
                real_scores.push_back(critic_forward(ys[b], critic, &cc));
                critic_backward(-1.0 / static_cast<double>(B), critic, cc, critic_grad);
                fake_scores.push_back(critic_forward(y_hats[b], critic, &cc));
                critic_backward(1.0 / static_cast<double>(B), critic, cc, critic_grad);
            }
            LossRecord rec;
            rec.epoch = epoch;
            rec.batch = batches + 1;
            rec.critic_loss = critic_loss(real_scores, fake_scores);
            rec.supervised_l1 = supervised_loss(ys, y_hats);
            rec.generator_loss = generator_loss(fake_scores, ys, y_hats, cfg.gamma);
            if (!std::isfinite(rec.critic_loss) || !std::isfinite(rec.generator_loss)) {
                fail(ErrorKind::divergence, "train: non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                                                std::to_string(rec.batch) + " (critic_loss=" +
                                                std::to_string(rec.critic_loss) + ", generator_loss=" +
                                                std::to_string(rec.generator_loss) + ")");
            }
            critic_opt.step(critic, critic_grad);
            clip_weights(critic, cfg.xi);
            ++i;
            ++result.critic_steps;
            if (on_step) on_step({false, result.critic_steps, result.generator_steps, &critic, &gen});

            if (i % cfg.n_critic == 0) {
                // generator update on -mean C(G(x, z)) + gamma * L1, same x and z
                GeneratorParams gen_grad = gen.zeros_like();
                CriticParams scratch = critic.zeros_like();
                GeneratorCache gc;
                std::vector<double> scores;
                std::vector<Vector> regenerated;
                const double inv_b = 1.0 / static_cast<double>(B);
                const double l1_scale = cfg.gamma / static_cast<double>(B * static_cast<std::size_t>(net.generator.horizon));
                for (std::size_t b = 0; b < B; ++b) {
                    const auto& s = dataset[order[start + b]];
                    Vector y_hat = generator_forward(s.x, zs[b], gen, &gc);
                    scores.push_back(critic_forward(y_hat, critic, &cc));
                    Vector grad_y = critic_backward(-inv_b, critic, cc, scratch);
                    grad_y += l1_scale * (y_hat - s.y).unaryExpr([](double d) { return double((d > 0) - (d < 0)); });
                    generator_backward(grad_y, gen, gc, gen_grad);
                    regenerated.push_back(std::move(y_hat));
                }
                rec.generator_loss = generator_loss(scores, ys, regenerated, cfg.gamma);
                if (!std::isfinite(rec.generator_loss)) {
                    fail(ErrorKind::divergence, "train: non-finite generator loss at epoch " + std::to_string(epoch));
                }
                gen_opt.step(gen, gen_grad);
                ++result.generator_steps;
                if (on_step) on_step({true, result.critic_steps, result.generator_steps, &critic, &gen});
            }
            epoch_l1 += rec.supervised_l1;
            ++batches;
            result.history.push_back(rec);
        }
        EpochSummary summary;
        summary.epoch = epoch;
        summary.mean_supervised_l1 = epoch_l1 / batches;
        if (!validation.empty()) {
            summary.validation_l1 = detail::mean_l1(validation, gen, validation_seed);
            if (summary.validation_l1 < best_val) {
                best_val = summary.validation_l1;
                result.best = make_bundle();
            }
        }
        log().debug("epoch {}: train L1 {:.6f}, validation L1 {:.6f}", epoch, summary.mean_supervised_l1,
                    summary.validation_l1);
        result.epochs.push_back(summary);
    }
    result.bundle = make_bundle();
    return result;
}

}  // namespace ragic
