#pragma once

#include <string>

namespace geomag::cli {

// Stderr logger gated by the GEOMAG_ALIGN_LOG environment variable
// (debug|info|warn|error, default warn). Artifacts go to files; the log
// never touches stdout, so piped output stays clean.
enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

LogLevel log_threshold();

void log_line(LogLevel level, const std::string& msg);

inline void log_debug(const std::string& msg) { log_line(LogLevel::Debug, msg); }
inline void log_info(const std::string& msg) { log_line(LogLevel::Info, msg); }
inline void log_warn(const std::string& msg) { log_line(LogLevel::Warn, msg); }
inline void log_error(const std::string& msg) { log_line(LogLevel::Error, msg); }

} // namespace geomag::cli
