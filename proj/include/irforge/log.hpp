#pragma once

#include <fmt/core.h>

#include <atomic>
#include <cstdio>

namespace irforge::log {

enum class Level { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

inline std::atomic<Level>& level() {
  static std::atomic<Level> lvl{Level::Warn};
  return lvl;
}

template <class... Args>
void warn(fmt::format_string<Args...> f, Args&&... args) {
  if (level() >= Level::Warn) fmt::print(stderr, "warning: {}\n", fmt::format(f, std::forward<Args>(args)...));
}

template <class... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
  if (level() >= Level::Info) fmt::print(stderr, "{}\n", fmt::format(f, std::forward<Args>(args)...));
}

template <class... Args>
void debug(fmt::format_string<Args...> f, Args&&... args) {
  if (level() >= Level::Debug) fmt::print(stderr, "debug: {}\n", fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace irforge::log
