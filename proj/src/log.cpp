#include "clonewatch/log.hpp"

#include <iostream>
#include <mutex>

namespace clonewatch::log {

namespace {
std::mutex sink_mutex;
Sink current_sink;
} // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex);
  Sink previous = std::move(current_sink);
  current_sink = std::move(sink);
  return previous;
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex);
  if (current_sink)
    current_sink(message);
  else
    std::cerr << "warning: " << message << '\n';
}

} // namespace clonewatch::log
