#pragma once

#include <string_view>

namespace congfu {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

/// Threshold read once from CONGFU_LOG_LEVEL (debug|info|warn|error|off),
/// default warn. Messages go to stderr.
LogLevel log_threshold();
void set_log_threshold(LogLevel level);
void log(LogLevel level, std::string_view message);

inline void log_info(std::string_view m) { log(LogLevel::Info, m); }
inline void log_warn(std::string_view m) { log(LogLevel::Warn, m); }

}  // namespace congfu
