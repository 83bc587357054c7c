#include "sgcp/logging.hpp"

#include <atomic>
#include <cstdio>
#include <string>

namespace sgcp {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::normal)};
}

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }

LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log_line(LogLevel level, std::string_view line) {
  if (level == LogLevel::quiet || static_cast<int>(level) > g_level.load()) return;
  std::string s(line);
  s.push_back('\n');
  std::fputs(s.c_str(), stderr);
}

}  // namespace sgcp
