#include "brex/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace brex {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::Warning)};
std::mutex g_mutex;
std::function<void(LogLevel, const std::string&)> g_sink;

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::Debug:
      return "debug";
    case LogLevel::Info:
      return "info";
    case LogLevel::Warning:
      return "warning";
    case LogLevel::Quiet:
      break;
  }
  return "";
}
}  // namespace

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }

void set_log_sink(std::function<void(LogLevel, const std::string&)> sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

void log_message(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) < g_level.load()) return;
  std::lock_guard lock(g_mutex);
  if (g_sink) {
    g_sink(level, msg);
    return;
  }
  std::cerr << "[brex " << level_name(level) << "] " << msg << '\n';
}

}  // namespace brex
