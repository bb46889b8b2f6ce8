#pragma once

#include <fmt/core.h>

#include <cstdio>
#include <string_view>

namespace imcf::log {

enum class Level { error = 0, info = 1, debug = 2 };

/// Reads IMCF_LOG once; unknown values fall back to info.
Level threshold();
void set_threshold(Level level);
Level parse_level(std::string_view text);

template <typename... Args>
void write(Level level, fmt::format_string<Args...> format, Args&&... args) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) { return; }
  static constexpr const char* tags[] = {"error", "info", "debug"};
  fmt::print(stderr, "[imcf:{}] ", tags[static_cast<int>(level)]);
  fmt::print(stderr, format, std::forward<Args>(args)...);
  std::fputc('\n', stderr);
}

template <typename... Args>
void error(fmt::format_string<Args...> format, Args&&... args) {
  write(Level::error, format, std::forward<Args>(args)...);
}
template <typename... Args>
void info(fmt::format_string<Args...> format, Args&&... args) {
  write(Level::info, format, std::forward<Args>(args)...);
}
template <typename... Args>
void debug(fmt::format_string<Args...> format, Args&&... args) {
  write(Level::debug, format, std::forward<Args>(args)...);
}

}  // namespace imcf::log
