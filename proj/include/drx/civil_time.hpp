#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "drx/error.hpp"

namespace drx {

// Minute-resolution civil timestamps. Values are minutes since
// 1970-01-01 00:00 in local market time; no timezone or DST handling
// is applied (market data conventions vary and conversion belongs to
// the data supplier, not this library).

using Minutes = std::int64_t;

struct CivilDateTime {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;   // 0..23
  int minute = 0; // 0..59
};

namespace detail {

// Days from 1970-01-01 for a civil date (Howard Hinnant's algorithm).
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);           // [0, 399]
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1; // [0, 365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;          // [0, 146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline CivilDateTime civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  CivilDateTime out;
  out.year = static_cast<int>(y + (m <= 2));
  out.month = static_cast<int>(m);
  out.day = static_cast<int>(d);
  return out;
}

inline bool is_leap(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int y, int m) {
  static constexpr int k[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : k[m - 1];
}

}  // namespace detail

inline Minutes to_minutes(const CivilDateTime& c) {
  return detail::days_from_civil(c.year, c.month, c.day) * 1440 +
         c.hour * 60 + c.minute;
}

inline CivilDateTime to_civil(Minutes t) {
  std::int64_t days = t / 1440;
  std::int64_t rem = t % 1440;
  if (rem < 0) {
    rem += 1440;
    --days;
  }
  CivilDateTime c = detail::civil_from_days(days);
  c.hour = static_cast<int>(rem / 60);
  c.minute = static_cast<int>(rem % 60);
  return c;
}

// 0 = Monday ... 6 = Sunday.
inline int weekday(Minutes t) {
  std::int64_t days = t / 1440;
  if (t % 1440 < 0) --days;
  return static_cast<int>(((days % 7) + 7 + 3) % 7);  // 1970-01-01 was Thursday
}

inline bool is_weekend(Minutes t) { return weekday(t) >= 5; }

// Minute of day, 0..1439.
inline int minute_of_day(Minutes t) {
  std::int64_t rem = t % 1440;
  if (rem < 0) rem += 1440;
  return static_cast<int>(rem);
}

// Parses "YYYY-MM-DD HH:MM", "YYYY-MM-DDTHH:MM", optional ":SS" (must be 00)
// and optional trailing "Z". Throws DomainError on malformed input.
inline Minutes parse_timestamp(std::string_view s) {
  auto fail = [&] { throw DomainError("unparseable timestamp '" + std::string(s) + "'"); };
  auto digit = [&](char ch) -> int {
    if (ch < '0' || ch > '9') fail();
    return ch - '0';
  };
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.remove_suffix(1);
  if (s.size() != 16 && s.size() != 19) fail();
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') fail();
  CivilDateTime c;
  c.year = digit(s[0]) * 1000 + digit(s[1]) * 100 + digit(s[2]) * 10 + digit(s[3]);
  c.month = digit(s[5]) * 10 + digit(s[6]);
  c.day = digit(s[8]) * 10 + digit(s[9]);
  c.hour = digit(s[11]) * 10 + digit(s[12]);
  c.minute = digit(s[14]) * 10 + digit(s[15]);
  if (s.size() == 19) {
    if (s[16] != ':') fail();
    const int sec = digit(s[17]) * 10 + digit(s[18]);
    if (sec != 0) throw DomainError("timestamp has sub-minute precision: '" + std::string(s) + "'");
  }
  if (c.month < 1 || c.month > 12) fail();
  if (c.day < 1 || c.day > detail::days_in_month(c.year, c.month)) fail();
  if (c.hour > 23 || c.minute > 59) fail();
  return to_minutes(c);
}

// Parses "YYYY-MM-DD" into the midnight timestamp of that date.
inline Minutes parse_date(std::string_view s) {
  if (s.size() != 10) throw DomainError("unparseable date '" + std::string(s) + "'");
  return parse_timestamp(std::string(s) + "T00:00");
}

// Parses "HH:MM" into a minute-of-day; accepts "24:00" as 1440.
inline int parse_time_of_day(std::string_view s) {
  auto fail = [&] { throw DomainError("unparseable time of day '" + std::string(s) + "'"); };
  if (s.size() != 5 || s[2] != ':') fail();
  auto digit = [&](char ch) -> int {
    if (ch < '0' || ch > '9') fail();
    return ch - '0';
  };
  const int h = digit(s[0]) * 10 + digit(s[1]);
  const int m = digit(s[3]) * 10 + digit(s[4]);
  if (h > 24 || m > 59 || (h == 24 && m != 0)) fail();
  return h * 60 + m;
}

inline std::string format_timestamp(Minutes t) {
  const CivilDateTime c = to_civil(t);
  char buf[20];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", c.year, c.month,
                c.day, c.hour, c.minute);
  return buf;
}

}  // namespace drx
