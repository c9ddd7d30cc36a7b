#pragma once

// Flat JSON run configuration. Every key except the two data paths has a
// default; unknown keys and type mismatches are rejected.
//
// Sensible tuning ranges:
//   batch_size {150, 256}, lr_generator {5e-5, 1e-4}, n_critic {3, 4, 5, 6},
//   tcn_layers {2, 3}, kernel_size {5, 8}, tcn_hidden {100, 150},
//   delta_vol_ret {0.05, 0.1, 0.2}, delta_vol_scaled {0.05, 0.1, 0.2, 0.25},
//   lambda_vol_ret {1.5, 2.5}, lambda_vol_scaled {1.5, 2.5, 4},
//   v_l {10, 12}, v_u {20, 22, 25}.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragic/error.hpp"
#include "ragic/generator.hpp"
#include "ragic/interval.hpp"
#include "ragic/market_data.hpp"
#include "ragic/risk_attention.hpp"
#include "ragic/trainer.hpp"

namespace ragic {

struct RunConfig {
    std::string ohlcv_path;
    std::string vol_path;
    std::string train_end = "2013-07-31";
    std::string val_end = "2015-12-31";
    std::string out_dir = "ragic_out";
    std::uint64_t seed = 0;

    int W = 30;
    int H = 5;
    int N = 50;

    int epochs = 50;
    int batch_size = 150;
    double lr_generator = 1e-4;
    double lr_critic = 3e-4;
    double gamma = 0.3;
    double xi = 0.01;
    int n_critic = 5;

    int heads = 2;
    int head_dim = 8;
    int tcn_layers = 2;
    int kernel_size = 5;
    int tcn_hidden = 100;
    int critic_hidden = 32;
    bool use_risk_module = true;
    bool use_temporal_module = true;

    double delta_vol_ret = 0.1;
    double lambda_vol_ret = 2.5;
    double delta_vol_scaled = 0.2;
    double lambda_vol_scaled = 2.5;

    double v_l = 10.0;
    double v_u = 22.0;
    double c_l = 0.90;
    double c_u = 0.999;
    double delta_eps = 1e-4;
    std::optional<double> fixed_confidence;

    double eta = 5.0;
    double cp_target = 0.95;
    bool use_best_checkpoint = true;
    std::vector<int> ablation_horizons = {3};

    SplitSpec split() const { return {Date::parse(train_end), Date::parse(val_end)}; }

    TrainConfig train_config() const {
        return {epochs, batch_size, lr_generator, lr_critic, gamma, xi, n_critic, seed};
    }

    NetworkConfig network_config() const {
        NetworkConfig n;
        n.generator = {W, kFeatureCount, H, heads, head_dim, tcn_layers, kernel_size, tcn_hidden,
                       use_risk_module, use_temporal_module};
        n.critic_hidden = critic_hidden;
        return n;
    }

    RiskParams risk_params() const {
        RiskParams r;
        r.delta = Vector::Zero(kFeatureCount);
        r.lambda = Vector::Zero(kFeatureCount);
        r.volatility_mask.assign(kFeatureCount, false);
        r.volatility_mask[kVolRet] = r.volatility_mask[kVolScaled] = true;
        r.delta(kVolRet) = delta_vol_ret;
        r.lambda(kVolRet) = lambda_vol_ret;
        r.delta(kVolScaled) = delta_vol_scaled;
        r.lambda(kVolScaled) = lambda_vol_scaled;
        return r;
    }

    SigmoidConfig sigmoid() const { return {v_l, v_u, c_l, c_u, delta_eps}; }

    /// Structural checks; `check_files` additionally requires the data files to exist.
    void validate(bool check_files) const {
        auto bad = [](const std::string& m) { fail(ErrorKind::config, "config: " + m); };
        if (W < 2 || H < 1 || N < 1) bad("W must be >= 2, H and N >= 1");
        if (N * H < 2) bad("N * H must be at least 2");
        try {
            split().validate();
            train_config().validate();
            network_config().generator.validate();
            risk_params().validate();
            sigmoid().validate();
        } catch (const Error& e) {
            bad(e.what());
        }
        if (fixed_confidence && !(*fixed_confidence > 0.0 && *fixed_confidence < 1.0)) {
            bad("fixed_confidence must lie in (0, 1)");
        }
        if (!(eta >= 0)) bad("eta must be non-negative");
        if (critic_hidden < 1) bad("critic_hidden must be positive");
        for (int h : ablation_horizons) {
            if (h < 1) bad("ablation_horizons entries must be positive");
        }
        if (check_files) {
            for (const auto* p : {&ohlcv_path, &vol_path}) {
                if (!std::filesystem::exists(*p)) bad("data file does not exist: " + *p);
            }
        }
    }
};

namespace detail {

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& out, std::set<std::string>& seen) {
    auto it = j.find(key);
    seen.insert(key);
    if (it == j.end()) return;
    const auto& v = *it;
    auto mismatch = [&](const char* type) {
        fail(ErrorKind::config, std::string("config: key '") + key + "' must be " + type);
    };
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) mismatch("a boolean");
        out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned()) mismatch("a non-negative integer");
        out = v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) mismatch("an integer");
        out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) mismatch("a number");
        out = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) mismatch("a string");
        out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::optional<double>>) {
        if (v.is_null()) out.reset();
        else if (v.is_number()) out = v.get<double>();
        else mismatch("a number or null");
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
        if (!v.is_array()) mismatch("an array of integers");
        out.clear();
        for (const auto& e : v) {
            if (!e.is_number_integer()) mismatch("an array of integers");
            out.push_back(e.get<int>());
        }
    }
}

template <class J, class C, class F>
void visit_config(J& j, C& c, F&& f) {
    f(j, "ohlcv_path", c.ohlcv_path);
    f(j, "vol_path", c.vol_path);
    f(j, "train_end", c.train_end);
    f(j, "val_end", c.val_end);
    f(j, "out_dir", c.out_dir);
    f(j, "seed", c.seed);
    f(j, "W", c.W);
    f(j, "H", c.H);
    f(j, "N", c.N);
    f(j, "epochs", c.epochs);
    f(j, "batch_size", c.batch_size);
    f(j, "lr_generator", c.lr_generator);
    f(j, "lr_critic", c.lr_critic);
    f(j, "gamma", c.gamma);
    f(j, "xi", c.xi);
    f(j, "n_critic", c.n_critic);
    f(j, "heads", c.heads);
    f(j, "head_dim", c.head_dim);
    f(j, "tcn_layers", c.tcn_layers);
    f(j, "kernel_size", c.kernel_size);
    f(j, "tcn_hidden", c.tcn_hidden);
    f(j, "critic_hidden", c.critic_hidden);
    f(j, "use_risk_module", c.use_risk_module);
    f(j, "use_temporal_module", c.use_temporal_module);
    f(j, "delta_vol_ret", c.delta_vol_ret);
    f(j, "lambda_vol_ret", c.lambda_vol_ret);
    f(j, "delta_vol_scaled", c.delta_vol_scaled);
    f(j, "lambda_vol_scaled", c.lambda_vol_scaled);
    f(j, "v_l", c.v_l);
    f(j, "v_u", c.v_u);
    f(j, "c_l", c.c_l);
    f(j, "c_u", c.c_u);
    f(j, "delta_eps", c.delta_eps);
    f(j, "fixed_confidence", c.fixed_confidence);
    f(j, "eta", c.eta);
    f(j, "cp_target", c.cp_target);
    f(j, "use_best_checkpoint", c.use_best_checkpoint);
    f(j, "ablation_horizons", c.ablation_horizons);
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorKind::config, "config: top level must be a JSON object");
    RunConfig c;
    std::set<std::string> known;
    detail::visit_config(j, c, [&](const nlohmann::json& jj, const char* key, auto& field) {
        detail::read_key(jj, key, field, known);
    });
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) fail(ErrorKind::config, "config: unknown key '" + key + "'");
    }
    for (const char* required : {"ohlcv_path", "vol_path"}) {
        if (!j.contains(required)) fail(ErrorKind::config, std::string("config: missing required key '") + required + "'");
    }
    return c;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j = nlohmann::json::object();
    detail::visit_config(j, c, [](nlohmann::json& jj, const char* key, const auto& field) {
        using T = std::decay_t<decltype(field)>;
        if constexpr (std::is_same_v<T, std::optional<double>>) {
            jj[key] = field ? nlohmann::json(*field) : nlohmann::json(nullptr);
        } else {
            jj[key] = field;
        }
    });
    return j;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config, "config: cannot read " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::config, std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig c = config_from_json(j);
    c.validate(false);
    return c;
}

}  // namespace ragic
