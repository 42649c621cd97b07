#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include <spdlog/sinks/ringbuffer_sink.h>

#include "gaswarm/log.hpp"

// Collects library log messages for the lifetime of the object.
class LogCapture {
 public:
  LogCapture() : sink_(std::make_shared<spdlog::sinks::ringbuffer_sink_mt>(256)) {
    sink_->set_pattern("%l %v");
    gaswarm::log::logger()->sinks().push_back(sink_);
  }
  ~LogCapture() {
    auto& sinks = gaswarm::log::logger()->sinks();
    sinks.erase(std::remove(sinks.begin(), sinks.end(), sink_), sinks.end());
  }
  LogCapture(const LogCapture&) = delete;
  LogCapture& operator=(const LogCapture&) = delete;

  [[nodiscard]] std::vector<std::string> messages() const { return sink_->last_formatted(); }
  [[nodiscard]] bool contains(const std::string& needle) const {
    for (const std::string& m : messages())
      if (m.find(needle) != std::string::npos) return true;
    return false;
  }

 private:
  std::shared_ptr<spdlog::sinks::ringbuffer_sink_mt> sink_;
};
