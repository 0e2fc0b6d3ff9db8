#include "icutl/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace icutl {
namespace {

bool read_uint(std::string_view text, std::size_t pos, std::size_t len, unsigned& out) {
  if (pos + len > text.size()) return false;
  const char* first = text.data() + pos;
  const char* last = first + len;
  for (const char* p = first; p != last; ++p) {
    if (*p < '0' || *p > '9') return false;
  }
  return std::from_chars(first, last, out).ec == std::errc{};
}

}  // namespace

Timestamp make_timestamp(int year, unsigned month, unsigned day, unsigned hour,
                         unsigned minute, unsigned second) {
  using namespace std::chrono;
  const sys_days days{year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                     std::chrono::day{day}}};
  return {static_cast<std::int64_t>(days.time_since_epoch().count()) * kSecondsPerDay +
          hour * kSecondsPerHour + minute * 60 + second};
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  if (text.size() != 19) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  unsigned year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!read_uint(text, 0, 4, year) || !read_uint(text, 5, 2, month) ||
      !read_uint(text, 8, 2, day) || !read_uint(text, 11, 2, hour) ||
      !read_uint(text, 14, 2, minute) || !read_uint(text, 17, 2, second)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(year)},
                                        std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) return std::nullopt;
  return make_timestamp(static_cast<int>(year), month, day, hour, minute, second);
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  std::int64_t days = t.seconds / kSecondsPerDay;
  std::int64_t rem = t.seconds % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
  return buf;
}

}  // namespace icutl
