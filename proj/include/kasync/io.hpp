#pragma once

#include <filesystem>
#include <string>

namespace kasync {

/// Shortest decimal form that round-trips a double exactly (17 significant digits).
std::string fmt_double(double v);

/// Write-temp-then-rename so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

enum class LogLevel { error = 0, info = 1, debug = 2 };

/// Level from KASYNC_LOG (error|info|debug), default error.
LogLevel log_level();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace kasync
