#pragma once

// Batch orchestration behind the CLI: ingest -> train -> forecast ->
// evaluate -> plot, plus the ablation sweep.

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragic/bundle.hpp"
#include "ragic/config.hpp"
#include "ragic/error.hpp"
#include "ragic/interval.hpp"
#include "ragic/log.hpp"
#include "ragic/market_data.hpp"
#include "ragic/metrics.hpp"
#include "ragic/plot.hpp"
#include "ragic/trainer.hpp"

namespace ragic {

namespace artifacts {
inline constexpr const char* kModel = "model.bin";
inline constexpr const char* kBestModel = "model_best.bin";
inline constexpr const char* kLossHistory = "loss_history.csv";
inline constexpr const char* kIntervals = "intervals.csv";
inline constexpr const char* kReport = "report.json";
inline constexpr const char* kReportCsv = "report.csv";
inline constexpr const char* kBaselineReport = "baseline_report.json";
inline constexpr const char* kPlot = "plot.svg";
inline constexpr const char* kAblation = "ablation.json";
}  // namespace artifacts

/// Feature table with level indicators normalized; vol_scaled still raw
/// until a scaler is applied.
inline FeatureTable prepare_features(const RunConfig& cfg) {
    const auto bars = load_ohlcv(cfg.ohlcv_path);
    const auto vols = load_vol(cfg.vol_path);
    return normalize_levels(compute_features(align_calendars(bars, vols)));
}

/// Windows whose last target day falls in `which`.
inline std::vector<WindowSample> windows_in_split(const FeatureTable& table, const SplitSpec& split, Split which,
                                                  int W, int H) {
    std::vector<WindowSample> out;
    for (auto& s : make_windows(table, static_cast<std::size_t>(W), static_cast<std::size_t>(H))) {
        if (split.of(table.dates[s.anchor_index + static_cast<std::size_t>(H)]) == which) out.push_back(std::move(s));
    }
    return out;
}

inline void write_loss_history(const std::string& path, const std::vector<LossRecord>& history) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    out << "epoch,batch,critic_loss,generator_loss,supervised_l1\n";
    for (const auto& r : history) {
        out << r.epoch << ',' << r.batch << ',' << csv::format_double(r.critic_loss) << ','
            << csv::format_double(r.generator_loss) << ',' << csv::format_double(r.supervised_l1) << '\n';
    }
}

inline std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Trains on windows ending inside the training period; the validation
/// period only selects the best checkpoint.
inline TrainResult train_model(const RunConfig& cfg, const FeatureTable& features) {
    const SplitSpec split = cfg.split();
    const ScalerState scaler = fit_scaler(features, split);
    const FeatureTable table = apply_scaler(features, scaler);
    const auto train_set = windows_in_split(table, split, Split::train, cfg.W, cfg.H);
    const auto val_set = windows_in_split(table, split, Split::validation, cfg.W, cfg.H);
    if (train_set.empty()) fail(ErrorKind::empty_dataset, "train: no training windows before " + cfg.train_end);
    log().info("training on {} windows ({} validation)", train_set.size(), val_set.size());
    TrainResult result = train(train_set, val_set, cfg.train_config(), cfg.network_config(), cfg.risk_params());
    auto stamp = [&](ModelBundle& b) {
        b.scaler = scaler;
        b.feature_names = table.column_names;
        b.volatility_mask = table.volatility_mask;
    };
    stamp(result.bundle);
    if (result.best) stamp(*result.best);
    return result;
}

inline int command_train(const RunConfig& cfg) {
    const auto dir = ensure_out_dir(cfg);
    const TrainResult result = train_model(cfg, prepare_features(cfg));
    save_bundle(result.bundle, (dir / artifacts::kModel).string());
    if (result.best) save_bundle(*result.best, (dir / artifacts::kBestModel).string());
    write_loss_history((dir / artifacts::kLossHistory).string(), result.history);
    log().info("wrote {} ({} critic / {} generator updates)", (dir / artifacts::kModel).string(),
               result.critic_steps, result.generator_steps);
    return 0;
}

inline ModelBundle load_forecast_bundle(const RunConfig& cfg) {
    const std::filesystem::path dir(cfg.out_dir);
    if (cfg.use_best_checkpoint && std::filesystem::exists(dir / artifacts::kBestModel)) {
        return load_bundle((dir / artifacts::kBestModel).string());
    }
    return load_bundle((dir / artifacts::kModel).string());
}

/// Interval for every test-period day with enough history.
inline std::vector<IntervalRecord> forecast_test_range(const RunConfig& cfg, const ModelBundle& bundle,
                                                       const FeatureTable& features) {
    if (bundle.feature_names != features.column_names) {
        fail(ErrorKind::config, "forecast: model was trained on a different feature schema");
    }
    const FeatureTable table = apply_scaler(features, bundle.scaler);
    const SplitSpec split = cfg.split();
    const int W = bundle.window();
    const int H = bundle.horizon();
    const auto first = static_cast<std::size_t>(W + H - 1);
    const std::uint64_t noise_seed = substream_seed(cfg.seed, "forecast-noise");
    const SigmoidConfig sigmoid = cfg.sigmoid();
    std::vector<IntervalRecord> rows;
    for (std::size_t t = first; t < table.rows(); ++t) {
        if (split.of(table.dates[t]) != Split::test) continue;
        const PredictionEnsemble e = simulate_horizon(bundle.generator, table, t, cfg.N, noise_seed);
        const double c = cfg.fixed_confidence ? *cfg.fixed_confidence : confidence(table.raw_vol[t - 1], sigmoid);
        const PredictionInterval iv = build_interval(e, c);
        rows.push_back({table.dates[t], iv.lower, iv.upper, iv.confidence, iv.point, table.raw_close[t]});
    }
    if (rows.empty()) fail(ErrorKind::empty_dataset, "forecast: no test-period days after " + cfg.val_end);
    return rows;
}

inline void write_intervals(const std::string& path, const std::vector<IntervalRecord>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    write_interval_csv(out, rows);
}

inline std::vector<IntervalRecord> read_intervals(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::missing_artifact, "interval file not found: " + path + " (run forecast first)");
    return read_interval_csv(in, path);
}

inline int command_forecast(const RunConfig& cfg) {
    const auto dir = ensure_out_dir(cfg);
    const ModelBundle bundle = load_forecast_bundle(cfg);
    const auto rows = forecast_test_range(cfg, bundle, prepare_features(cfg));
    write_intervals((dir / artifacts::kIntervals).string(), rows);
    log().info("wrote {} intervals to {}", rows.size(), (dir / artifacts::kIntervals).string());
    return 0;
}

/// Bollinger (20, 2) bands from the 20 closes before each forecast day; the
/// middle band is the point forecast.
inline std::vector<IntervalRecord> bollinger_baseline(const FeatureTable& table,
                                                      const std::vector<IntervalRecord>& days) {
    const auto bands = bollinger_bands(table.raw_close, 20, 2.0);
    std::map<Date, std::size_t> index;
    for (std::size_t i = 0; i < table.rows(); ++i) index[table.dates[i]] = i;
    std::vector<IntervalRecord> out;
    for (const auto& d : days) {
        auto it = index.find(d.date);
        if (it == index.end() || it->second == 0) continue;
        const auto& b = bands[it->second - 1];
        if (!b.defined) continue;
        out.push_back({d.date, b.lower, b.upper, 0.0, b.middle, table.raw_close[it->second]});
    }
    return out;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    out << j.dump(2) << '\n';
}

inline int command_evaluate(const RunConfig& cfg) {
    const auto dir = ensure_out_dir(cfg);
    const auto rows = read_intervals((dir / artifacts::kIntervals).string());
    const EvaluationReport report = evaluate(rows, cfg.eta, cfg.cp_target);
    write_json((dir / artifacts::kReport).string(), to_json(report));
    {
        std::ofstream out(dir / artifacts::kReportCsv, std::ios::trunc);
        write_report_csv(out, report);
    }
    const EvaluationReport baseline = evaluate(bollinger_baseline(prepare_features(cfg), rows), cfg.eta, cfg.cp_target);
    write_json((dir / artifacts::kBaselineReport).string(), to_json(baseline));
    log().info("CP {:.4f} NMW {:.4f} CWC {:.4f} MAPE {:.4f} over {} days (Bollinger CWC {:.4f})", report.cp,
               report.nmw, report.cwc, report.mape, report.T, baseline.cwc);
    return 0;
}

inline int command_plot(const RunConfig& cfg) {
    const auto dir = ensure_out_dir(cfg);
    emit_plot(read_intervals((dir / artifacts::kIntervals).string()), (dir / artifacts::kPlot).string());
    return 0;
}

inline nlohmann::json summary_json(const EvaluationReport& r) {
    return {{"cp", r.cp}, {"nmw", r.nmw}, {"cwc", r.cwc}, {"mape", r.mape}, {"T", r.T}};
}

/// Reruns the forecast for each ablation: the trained model as-is, a fixed
/// 95% confidence, and retrained variants without the risk module, without
/// the temporal module, and with each alternate horizon.
inline int command_ablate(const RunConfig& cfg) {
    const auto dir = ensure_out_dir(cfg);
    const FeatureTable features = prepare_features(cfg);
    const ModelBundle bundle = load_forecast_bundle(cfg);
    nlohmann::json out = nlohmann::json::object();
    // A failing variant (e.g. a barely trained model emitting a return <= -1)
    // is recorded in the summary instead of aborting the sweep.
    auto guarded = [&](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const Error& e) {
            out[name] = {{"error", std::string(to_string(e.kind())) + ": " + e.what()}};
            log().warn("ablation {} failed: {}", name, e.what());
        }
    };
    auto run = [&](const std::string& name, const RunConfig& variant, const ModelBundle& b) {
        const auto rows = forecast_test_range(variant, b, features);
        write_intervals((dir / ("ablation_" + name + "_intervals.csv")).string(), rows);
        out[name] = summary_json(evaluate(rows, cfg.eta, cfg.cp_target));
        log().info("ablation {}: CWC {:.4f}", name, out[name]["cwc"].get<double>());
    };
    guarded("full", [&] { run("full", cfg, bundle); });
    RunConfig fixed = cfg;
    fixed.fixed_confidence = 0.95;
    guarded("fixed_confidence", [&] { run("fixed_confidence", fixed, bundle); });
    auto retrain = [&](const std::string& name, RunConfig variant) {
        guarded(name, [&] {
            TrainResult r = train_model(variant, features);
            run(name, variant, (variant.use_best_checkpoint && r.best) ? *r.best : r.bundle);
        });
    };
    RunConfig no_risk = cfg;
    no_risk.use_risk_module = false;
    retrain("no_risk", no_risk);
    RunConfig no_temporal = cfg;
    no_temporal.use_temporal_module = false;
    retrain("no_temporal", no_temporal);
    for (int h : cfg.ablation_horizons) {
        if (h == cfg.H) continue;
        RunConfig hv = cfg;
        hv.H = h;
        retrain("horizon_" + std::to_string(h), hv);
    }
    write_json((dir / artifacts::kAblation).string(), out);
    return 0;
}

}  // namespace ragic
