#pragma once

#include <string_view>

namespace sgcp {

enum class LogLevel { quiet = 0, normal = 1, verbose = 2 };

void set_log_level(LogLevel level);
LogLevel log_level();

/// Writes one line to standard error when level <= the active level.
void log_line(LogLevel level, std::string_view line);

}  // namespace sgcp
