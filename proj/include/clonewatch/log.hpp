#pragma once

#include <functional>
#include <string_view>

// Process-wide warning channel. Library code reports recoverable problems
// (skipped manifest rows, unreadable files) here instead of failing.
namespace clonewatch::log {

using Sink = std::function<void(std::string_view)>;

// Replaces the sink and returns the previous one. An empty sink restores
// the default (stderr).
Sink set_sink(Sink sink);

void warn(std::string_view message);

// Installs a sink for the lifetime of the object.
class ScopedSink {
public:
  explicit ScopedSink(Sink sink) : previous_(set_sink(std::move(sink))) {}
  ~ScopedSink() { set_sink(std::move(previous_)); }
  ScopedSink(const ScopedSink&) = delete;
  ScopedSink& operator=(const ScopedSink&) = delete;

private:
  Sink previous_;
};

} // namespace clonewatch::log
