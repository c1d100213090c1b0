#pragma once

#include <string>

namespace gtrans {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Read once from GTRANS_LOG ({error, info, debug}); defaults to error.
LogLevel log_level();
void set_log_level(LogLevel level);

void log_error(const std::string& message);
void log_warn(const std::string& message);  // shown at info and above
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace gtrans
