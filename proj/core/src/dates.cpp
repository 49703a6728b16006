#include "epf/dates.hpp"

#include "epf/errors.hpp"

#include <cctype>
#include <cstdio>

namespace epf {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

Date parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
      !all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) ||
      !all_digits(s.substr(8, 2))) {
    throw ParseError("malformed date: '" + std::string(s) + "'");
  }
  std::chrono::year_month_day ymd{
      std::chrono::year{to_int(s.substr(0, 4))},
      std::chrono::month{static_cast<unsigned>(to_int(s.substr(5, 2)))},
      std::chrono::day{static_cast<unsigned>(to_int(s.substr(8, 2)))}};
  if (!ymd.ok()) {
    throw ParseError("invalid calendar date: '" + std::string(s) + "'");
  }
  return Date{ymd};
}

std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

int iso_weekday(Date d) {
  return static_cast<int>(std::chrono::weekday{d}.iso_encoding());
}

LocalHour parse_local_hour(std::string_view s) {
  if (s.size() < 13) {
    throw ParseError("malformed timestamp: '" + std::string(s) + "'");
  }
  Date day = parse_date(s.substr(0, 10));
  char sep = s[10];
  if (sep != 'T' && sep != ' ') {
    throw ParseError("malformed timestamp: '" + std::string(s) + "'");
  }
  std::string_view hh = s.substr(11, 2);
  if (!all_digits(hh)) {
    throw ParseError("malformed timestamp: '" + std::string(s) + "'");
  }
  int hour = to_int(hh);
  if (hour > 23) {
    throw ParseError("hour out of range in timestamp: '" + std::string(s) + "'");
  }
  // Minutes, seconds and a trailing offset ("+01:00", "Z") may follow; only
  // the minutes are checked for shape, the rest is free-form.
  if (s.size() > 13) {
    if (s[13] != ':' || s.size() < 16 || !all_digits(s.substr(14, 2))) {
      throw ParseError("malformed timestamp: '" + std::string(s) + "'");
    }
  }
  return LocalHour{day, hour + 1};
}

}  // namespace epf
