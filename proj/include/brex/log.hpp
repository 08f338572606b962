#pragma once

#include <functional>
#include <string>

namespace brex {

enum class LogLevel { Debug = 0, Info = 1, Warning = 2, Quiet = 3 };

/// Process-wide threshold; messages below it are dropped. Defaults to Warning.
void set_log_level(LogLevel level);
/// Replaces the stderr sink (pass nullptr to restore it).
void set_log_sink(std::function<void(LogLevel, const std::string&)> sink);

void log_message(LogLevel level, const std::string& msg);
inline void log_info(const std::string& msg) { log_message(LogLevel::Info, msg); }
inline void log_warning(const std::string& msg) { log_message(LogLevel::Warning, msg); }

}  // namespace brex
