#include "gtrans/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace gtrans {

namespace {

LogLevel from_env() {
  const char* env = std::getenv("GTRANS_LOG");
  if (env == nullptr) return LogLevel::Error;
  const std::string_view v(env);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  return LogLevel::Error;
}

std::atomic<int>& level_storage() {
  static std::atomic<int> level{static_cast<int>(from_env())};
  return level;
}

void emit(LogLevel level, const char* tag, const std::string& message) {
  if (static_cast<int>(level) > level_storage().load()) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[gtrans " << tag << "] " << message << '\n';
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_storage().load()); }
void set_log_level(LogLevel level) { level_storage().store(static_cast<int>(level)); }

void log_error(const std::string& message) { emit(LogLevel::Error, "error", message); }
void log_warn(const std::string& message) { emit(LogLevel::Info, "warn", message); }
void log_info(const std::string& message) { emit(LogLevel::Info, "info", message); }
void log_debug(const std::string& message) { emit(LogLevel::Debug, "debug", message); }

}  // namespace gtrans
