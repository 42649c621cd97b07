#include "gaswarm/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

namespace gaswarm::log {

std::shared_ptr<spdlog::logger> logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto l = std::make_shared<spdlog::logger>(
        "gaswarm", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_level(spdlog::level::warn);
    l->set_pattern("[gaswarm %l] %v");
    return l;
  }();
  return instance;
}

}  // namespace gaswarm::log
