#pragma once

#include <memory>
#include <string_view>
#include <utility>

#include <spdlog/logger.h>

namespace gaswarm::log {

/// The library logger ("gaswarm"), writing to stderr. Defaults to warnings
/// and above; add sinks to capture messages.
[[nodiscard]] std::shared_ptr<spdlog::logger> logger();

inline void set_level(spdlog::level::level_enum level) { logger()->set_level(level); }

inline void debug(std::string_view m) { logger()->debug(m); }
inline void info(std::string_view m) { logger()->info(m); }
inline void warning(std::string_view m) { logger()->warn(m); }
inline void error(std::string_view m) { logger()->error(m); }

template <class... Args>
void debug(fmt::format_string<Args...> f, Args&&... args) {
  logger()->debug(f, std::forward<Args>(args)...);
}
template <class... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
  logger()->info(f, std::forward<Args>(args)...);
}
template <class... Args>
void warning(fmt::format_string<Args...> f, Args&&... args) {
  logger()->warn(f, std::forward<Args>(args)...);
}

}  // namespace gaswarm::log
