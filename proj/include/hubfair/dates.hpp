#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "hubfair/text.hpp"

namespace hubfair {

using Date = std::chrono::sys_days;

inline std::optional<Date> parse_date(std::string_view s) {
  s = text::trim(s);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = text::parse_int(s.substr(0, 4));
  auto m = text::parse_int(s.substr(5, 2));
  auto d = text::parse_int(s.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(*y)},
                                        std::chrono::month{static_cast<unsigned>(*m)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline Date make_date(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

inline std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline bool is_saturday(Date date) {
  return std::chrono::weekday{date} == std::chrono::Saturday;
}

// MMWR epi weeks run Sunday..Saturday; returns the Saturday closing the week
// that contains `date`.
inline Date epi_week_end(Date date) {
  const std::chrono::weekday wd{date};
  const auto ahead = std::chrono::Saturday - wd;  // weekday difference is mod 7
  return date + ahead;
}

}  // namespace hubfair
