#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace clonewatch {

// All instants are UTC with second resolution; git records no finer.
using Timestamp = std::chrono::sys_seconds;

// Accepts RFC 3339 date-times ("2018-09-18T21:47:28Z", offsets, fractional
// seconds) and bare full-dates ("2017-04-01", read as midnight UTC).
// Fractional seconds are truncated.
std::optional<Timestamp> parse_timestamp(std::string_view text);

// Canonical form: YYYY-MM-DDTHH:MM:SSZ.
std::string format_timestamp(Timestamp ts);

Timestamp from_unix_seconds(long long seconds);

Timestamp now_utc();

} // namespace clonewatch
