#include "topicreg/timeutil.hpp"

#include <charconv>
#include <cstdio>

namespace topicreg {
namespace {

using namespace std::chrono;

bool read_int(std::string_view text, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > text.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + width, out);
  return ec == std::errc{} && ptr == text.data() + pos + width;
}

std::optional<sys_days> parse_ymd(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, m) || !read_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

// Parses "+HH:MM", "+HHMM", "+HH" starting at text[0] in {'+','-'}.
std::optional<minutes> parse_signed_hhmm(std::string_view text) {
  if (text.empty() || (text[0] != '+' && text[0] != '-')) return std::nullopt;
  const int sign = text[0] == '-' ? -1 : 1;
  std::string_view rest = text.substr(1);
  int hh = 0, mm = 0;
  if (rest.size() == 2) {
    if (!read_int(rest, 0, 2, hh)) return std::nullopt;
  } else if (rest.size() == 4) {
    if (!read_int(rest, 0, 2, hh) || !read_int(rest, 2, 2, mm)) return std::nullopt;
  } else if (rest.size() == 5 && rest[2] == ':') {
    if (!read_int(rest, 0, 2, hh) || !read_int(rest, 3, 2, mm)) return std::nullopt;
  } else {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59) return std::nullopt;
  return minutes{sign * (hh * 60 + mm)};
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  auto day_part = parse_ymd(text);
  if (!day_part) return std::nullopt;
  if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') {
    return std::nullopt;
  }
  int hh = 0, mi = 0, ss = 0;
  if (!read_int(text, 11, 2, hh) || !read_int(text, 14, 2, mi)) return std::nullopt;
  std::size_t pos = 16;
  if (pos < text.size() && text[pos] == ':') {
    if (!read_int(text, pos + 1, 2, ss)) return std::nullopt;
    pos += 3;
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    }
  }
  if (hh > 23 || mi > 59 || ss > 60) return std::nullopt;

  minutes zone{0};
  std::string_view tail = text.substr(pos);
  if (tail == "Z" || tail == "z" || tail.empty()) {
    zone = minutes{0};
  } else if (auto parsed = parse_signed_hhmm(tail)) {
    zone = *parsed;
  } else {
    return std::nullopt;
  }
  const auto local = *day_part + hours{hh} + minutes{mi} + seconds{ss};
  return time_point_cast<seconds>(local - zone);
}

std::string format_iso8601(Timestamp ts) {
  const auto day = floor<days>(ts);
  const year_month_day ymd{day};
  const hh_mm_ss hms{ts - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

std::optional<sys_days> parse_date(std::string_view text) {
  if (text.size() != 10) return std::nullopt;
  return parse_ymd(text);
}

std::string format_date(sys_days day) {
  const year_month_day ymd{day};
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<UtcOffset> parse_utc_offset(std::string_view text) {
  if (text.empty() || text == "Z" || text == "UTC" || text == "utc") return UtcOffset{};
  if (auto hhmm = parse_signed_hhmm(text)) return UtcOffset{*hhmm};
  int raw = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), raw);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  if (raw < -24 * 60 || raw > 24 * 60) return std::nullopt;
  return UtcOffset{minutes{raw}};
}

std::string format_utc_offset(UtcOffset offset) {
  const long total = offset.minutes.count();
  const long mag = total < 0 ? -total : total;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%c%02ld:%02ld", total < 0 ? '-' : '+', mag / 60, mag % 60);
  return buf;
}

LocalTime to_local(Timestamp ts, UtcOffset offset) {
  const auto shifted = ts + offset.minutes;
  const auto day = floor<days>(shifted);
  const auto since_midnight = shifted - day;
  return LocalTime{day, static_cast<int>(duration_cast<hours>(since_midnight).count()),
                   weekday{day}};
}

}  // namespace topicreg
