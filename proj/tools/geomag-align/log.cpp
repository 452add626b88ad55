#include "log.hpp"

#include <cstdlib>
#include <iostream>
#include <string_view>

namespace geomag::cli {

namespace {

LogLevel parse_level(const char* text) {
    const std::string_view s = text ? text : "";
    if (s == "debug") return LogLevel::Debug;
    if (s == "info") return LogLevel::Info;
    if (s == "warn" || s == "warning") return LogLevel::Warn;
    if (s == "error") return LogLevel::Error;
    return LogLevel::Warn;
}

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::Debug: return "debug";
        case LogLevel::Info: return "info";
        case LogLevel::Warn: return "warn";
        case LogLevel::Error: return "error";
    }
    return "?";
}

} // namespace

LogLevel log_threshold() {
    static const LogLevel level = parse_level(std::getenv("GEOMAG_ALIGN_LOG"));
    return level;
}

void log_line(LogLevel level, const std::string& msg) {
    if (level < log_threshold()) return;
    std::cerr << "[geomag-align] " << level_name(level) << ": " << msg << '\n';
}

} // namespace geomag::cli
