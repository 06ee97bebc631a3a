#include "gngwt/log.h"

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace gngwt {

void configure_logging_from_env() {
    auto logger = spdlog::stderr_color_mt("gngwt");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("GNGWT_LOG");
    const std::string_view level = env != nullptr ? env : "info";
    if (level == "error") {
        spdlog::set_level(spdlog::level::err);
    } else if (level == "debug") {
        spdlog::set_level(spdlog::level::debug);
    } else {
        if (level != "info") spdlog::warn("unknown GNGWT_LOG value '{}', using info", level);
        spdlog::set_level(spdlog::level::info);
    }
}

}  // namespace gngwt
