#include "factline/date.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace factline {

bool Date::valid() const {
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{month},
                                        std::chrono::day{day}};
  return ymd.ok();
}

std::string Date::to_iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
  return buf;
}

std::optional<Date> Date::parse_iso(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](std::size_t off, std::size_t len, int& out) {
    auto [p, ec] = std::from_chars(s.data() + off, s.data() + off + len, out);
    return ec == std::errc{} && p == s.data() + off + len;
  };
  int y = 0, m = 0, d = 0;
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  Date date{y, static_cast<unsigned>(m), static_cast<unsigned>(d)};
  if (!date.valid()) return std::nullopt;
  return date;
}

std::string IsoWeek::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-W%02u", year, week);
  return buf;
}

std::int64_t days_from_civil(const Date& d) {
  const std::chrono::year_month_day ymd{std::chrono::year{d.year},
                                        std::chrono::month{d.month},
                                        std::chrono::day{d.day}};
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

int iso_weekday(const Date& d) {
  const std::chrono::year_month_day ymd{std::chrono::year{d.year},
                                        std::chrono::month{d.month},
                                        std::chrono::day{d.day}};
  return static_cast<int>(std::chrono::weekday{std::chrono::sys_days{ymd}}.iso_encoding());
}

IsoWeek iso_week(const Date& d) {
  // Week 1 is the week containing the first Thursday of the year; weeks run
  // Monday..Sunday. Computed by finding the Monday of this date's week and
  // the year owning that week's Thursday.
  const std::int64_t days = days_from_civil(d);
  const int wd = iso_weekday(d);
  const std::int64_t thursday = days + (4 - wd);  // Thursday of this ISO week

  // Year containing that Thursday owns the week.
  const std::chrono::sys_days tday{std::chrono::days{thursday}};
  const std::chrono::year_month_day tymd{tday};
  const int iso_year = static_cast<int>(tymd.year());

  const std::int64_t jan1 = days_from_civil(Date{iso_year, 1, 1});
  const unsigned week = static_cast<unsigned>((thursday - jan1) / 7) + 1;
  return IsoWeek{iso_year, week};
}

}  // namespace factline
