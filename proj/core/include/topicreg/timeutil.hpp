#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace topicreg {

using Timestamp = std::chrono::sys_seconds;

/// Fixed offset from UTC applied before extracting calendar date and hour.
struct UtcOffset {
  std::chrono::minutes minutes{0};
  friend bool operator==(const UtcOffset&, const UtcOffset&) = default;
};

/// Calendar view of a timestamp after shifting by a UtcOffset.
struct LocalTime {
  std::chrono::sys_days date;
  int hour = 0;
  std::chrono::weekday weekday;
};

/// Accepts `YYYY-MM-DD[T ]HH:MM[:SS[.fff]]` followed by `Z`, `+HH:MM`,
/// `-HH:MM`, `+HHMM`, or nothing (taken as UTC). Fractional seconds are
/// truncated.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(Timestamp ts);

std::optional<std::chrono::sys_days> parse_date(std::string_view text);
std::string format_date(std::chrono::sys_days day);

/// "+05:30", "-0400", "Z", "UTC", or a bare minute count such as "-300".
std::optional<UtcOffset> parse_utc_offset(std::string_view text);
std::string format_utc_offset(UtcOffset offset);

LocalTime to_local(Timestamp ts, UtcOffset offset);

}  // namespace topicreg
