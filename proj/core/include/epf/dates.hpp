#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace epf {

using Date = std::chrono::sys_days;

/// Parse "YYYY-MM-DD". Throws ParseError on malformed input or an invalid
/// calendar date.
Date parse_date(std::string_view s);

std::string format_date(Date d);

/// ISO weekday, 1 = Monday .. 7 = Sunday.
int iso_weekday(Date d);

inline Date add_days(Date d, int n) { return d + std::chrono::days{n}; }

/// One row of an hourly file: calendar day plus load period 1..24.
struct LocalHour {
  Date day;
  int hour;  // 1..24

  friend bool operator==(const LocalHour&, const LocalHour&) = default;
  friend auto operator<=>(const LocalHour&, const LocalHour&) = default;
};

/// Parse an ISO-8601 timestamp in local market time, e.g.
/// "2021-03-28T02:00:00+02:00" or "2021-03-28 02:00". The zone offset is
/// accepted and ignored: rows are bucketed by local clock time, which is what
/// makes the duplicated DST hour show up as two rows in the same bucket.
LocalHour parse_local_hour(std::string_view s);

/// Inclusive day range.
struct DateRange {
  Date first;
  Date last;

  bool contains(Date d) const { return d >= first && d <= last; }
  int num_days() const {
    return static_cast<int>((last - first).count()) + 1;
  }
};

}  // namespace epf
