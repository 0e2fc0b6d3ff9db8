#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace icutl {

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;

// Naive wall-clock instant with one-second resolution, stored as seconds
// from 1970-01-01T00:00:00. No timezone: source data is date-shifted.
struct Timestamp {
  std::int64_t seconds = 0;

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;

  constexpr Timestamp plus_seconds(std::int64_t s) const { return {seconds + s}; }
  constexpr Timestamp plus_hours(double h) const {
    return {seconds + static_cast<std::int64_t>(h * kSecondsPerHour)};
  }
};

constexpr double hours_between(Timestamp from, Timestamp to) {
  return static_cast<double>(to.seconds - from.seconds) / kSecondsPerHour;
}

constexpr double days_between(Timestamp from, Timestamp to) {
  return static_cast<double>(to.seconds - from.seconds) / kSecondsPerDay;
}

// Parses `YYYY-MM-DDTHH:MM:SS` (a space separator is also accepted).
// Returns nullopt on any malformed or out-of-range component.
std::optional<Timestamp> parse_timestamp(std::string_view text);

std::string format_timestamp(Timestamp t);

Timestamp make_timestamp(int year, unsigned month, unsigned day, unsigned hour = 0,
                         unsigned minute = 0, unsigned second = 0);

}  // namespace icutl
