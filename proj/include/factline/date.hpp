#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace factline {

// Calendar date. Only the canonical ISO-8601 form YYYY-MM-DD is parsed here;
// ingestion may register extra parsers on top.
struct Date {
  int year = 0;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;

  bool valid() const;
  std::string to_iso() const;  // zero-padded YYYY-MM-DD

  static std::optional<Date> parse_iso(std::string_view s);
};

// ISO-8601 week-date year and week number (1..53).
struct IsoWeek {
  int year = 0;
  unsigned week = 0;

  auto operator<=>(const IsoWeek&) const = default;

  std::string str() const;  // "GGGG-Www", e.g. "2020-W03"
};

IsoWeek iso_week(const Date& d);

// Days since 1970-01-01 (proleptic Gregorian), negative before the epoch.
std::int64_t days_from_civil(const Date& d);

// ISO weekday, Monday=1 .. Sunday=7.
int iso_weekday(const Date& d);

}  // namespace factline
