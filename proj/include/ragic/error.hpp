#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ragic {

/// Failure categories raised by the library. Each maps to a stable
/// machine-readable tag and to a CLI exit status.
enum class ErrorKind {
    parse,
    validation,
    alignment,
    warmup,
    degenerate_scaler,
    empty_dataset,
    numeric,
    shape,
    configuration,
    batch,
    divergence,
    version,
    integrity,
    invalid_return,
    coverage_gap,
    degenerate_ensemble,
    out_of_range,
    length_mismatch,
    degenerate_range,
    undefined_metric,
    plot,
    config,
    missing_artifact,
    io,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::warmup: return "warmup";
    case ErrorKind::degenerate_scaler: return "degenerate_scaler";
    case ErrorKind::empty_dataset: return "empty_dataset";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::shape: return "shape";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::batch: return "batch";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::version: return "version";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::invalid_return: return "invalid_return";
    case ErrorKind::coverage_gap: return "coverage_gap";
    case ErrorKind::degenerate_ensemble: return "degenerate_ensemble";
    case ErrorKind::out_of_range: return "out_of_range";
    case ErrorKind::length_mismatch: return "length_mismatch";
    case ErrorKind::degenerate_range: return "degenerate_range";
    case ErrorKind::undefined_metric: return "undefined_metric";
    case ErrorKind::plot: return "plot";
    case ErrorKind::config: return "config";
    case ErrorKind::missing_artifact: return "missing_artifact";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

/// Process exit status: 2 config, 3 missing artifact, 4 data, 5 divergence, 1 otherwise.
inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::config:
        return 2;
    case ErrorKind::missing_artifact:
        return 3;
    case ErrorKind::parse:
    case ErrorKind::validation:
    case ErrorKind::alignment:
    case ErrorKind::warmup:
    case ErrorKind::degenerate_scaler:
    case ErrorKind::empty_dataset:
    case ErrorKind::coverage_gap:
    case ErrorKind::version:
    case ErrorKind::integrity:
    case ErrorKind::io:
        return 4;
    case ErrorKind::divergence:
        return 5;
    default:
        return 1;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace ragic
