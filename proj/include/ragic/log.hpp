#pragma once

#include <cstdlib>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace ragic {

/// Shared stderr logger. Verbosity comes from RAGIC_LOG (error|info|debug),
/// defaulting to info.
inline spdlog::logger& log() {
    static std::shared_ptr<spdlog::logger> logger = [] {
        auto l = spdlog::stderr_color_mt("ragic");
        l->set_pattern("[%l] %v");
        spdlog::level::level_enum level = spdlog::level::info;
        if (const char* env = std::getenv("RAGIC_LOG")) {
            std::string v(env);
            if (v == "error") level = spdlog::level::err;
            else if (v == "debug") level = spdlog::level::debug;
        }
        l->set_level(level);
        return l;
    }();
    return *logger;
}

}  // namespace ragic
