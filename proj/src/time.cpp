#include "clonewatch/time.hpp"

#include <cctype>
#include <cstdio>

namespace clonewatch {

namespace {

bool read_digits(std::string_view s, std::size_t& pos, std::size_t count,
                 int& value) {
  if (pos + count > s.size())
    return false;
  value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    char c = s[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c)))
      return false;
    value = value * 10 + (c - '0');
  }
  pos += count;
  return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos < s.size() && s[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}

} // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  std::size_t pos = 0;
  int y = 0, mo = 0, d = 0;
  if (!read_digits(s, pos, 4, y) || !expect(s, pos, '-') ||
      !read_digits(s, pos, 2, mo) || !expect(s, pos, '-') ||
      !read_digits(s, pos, 2, d))
    return std::nullopt;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok())
    return std::nullopt;
  sys_seconds base = sys_days{ymd};
  if (pos == s.size())
    return base;

  if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ')
    return std::nullopt;
  ++pos;
  int h = 0, mi = 0, sec = 0;
  if (!read_digits(s, pos, 2, h) || !expect(s, pos, ':') ||
      !read_digits(s, pos, 2, mi) || !expect(s, pos, ':') ||
      !read_digits(s, pos, 2, sec))
    return std::nullopt;
  // 60 admits a leap second, folded into the next minute.
  if (h > 23 || mi > 59 || sec > 60)
    return std::nullopt;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
      ++pos;
    if (pos == start)
      return std::nullopt;
  }
  if (pos == s.size())
    return std::nullopt;

  seconds offset{0};
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int sign = s[pos] == '+' ? 1 : -1;
    ++pos;
    int oh = 0, om = 0;
    if (!read_digits(s, pos, 2, oh) || !expect(s, pos, ':') ||
        !read_digits(s, pos, 2, om) || oh > 23 || om > 59)
      return std::nullopt;
    offset = sign * (hours{oh} + minutes{om});
  } else {
    return std::nullopt;
  }
  if (pos != s.size())
    return std::nullopt;
  return base + hours{h} + minutes{mi} + seconds{sec} - offset;
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  auto day_point = floor<days>(ts);
  year_month_day ymd{day_point};
  hh_mm_ss tod{ts - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

Timestamp from_unix_seconds(long long seconds) {
  return Timestamp{std::chrono::seconds{seconds}};
}

Timestamp now_utc() {
  return std::chrono::floor<std::chrono::seconds>(
      std::chrono::system_clock::now());
}

} // namespace clonewatch
