#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace snb {

/// Span of simulation time, millisecond resolution.
struct SimDuration {
    std::int64_t millis = 0;

    static constexpr SimDuration seconds(std::int64_t s) { return {s * 1000}; }
    static constexpr SimDuration minutes(std::int64_t m) { return {m * 60'000}; }
    static constexpr SimDuration hours(std::int64_t h) { return {h * 3'600'000}; }
    static constexpr SimDuration days(std::int64_t d) { return {d * 86'400'000}; }

    constexpr auto operator<=>(const SimDuration&) const = default;
    constexpr SimDuration operator+(SimDuration o) const { return {millis + o.millis}; }
    constexpr SimDuration operator-(SimDuration o) const { return {millis - o.millis}; }
    constexpr SimDuration operator*(std::int64_t k) const { return {millis * k}; }
};

/// A point on the simulation timeline (milliseconds since the Unix epoch, UTC).
struct SimInstant {
    std::int64_t millis = 0;

    constexpr auto operator<=>(const SimInstant&) const = default;
    constexpr SimInstant operator+(SimDuration d) const { return {millis + d.millis}; }
    constexpr SimInstant operator-(SimDuration d) const { return {millis - d.millis}; }
    constexpr SimDuration operator-(SimInstant o) const { return {millis - o.millis}; }

    static constexpr SimInstant min() { return {INT64_MIN / 4}; }
    static constexpr SimInstant max() { return {INT64_MAX / 4}; }
};

/// Calendar day counted from 1970-01-01.
struct SimDay {
    std::int64_t days_since_epoch = 0;

    constexpr auto operator<=>(const SimDay&) const = default;
    constexpr SimDay next() const { return {days_since_epoch + 1}; }
    constexpr SimInstant start() const { return {days_since_epoch * 86'400'000}; }
    constexpr SimInstant end() const { return next().start(); }
};

constexpr SimDay day_of(SimInstant t) {
    std::int64_t d = t.millis / 86'400'000;
    if (t.millis < 0 && t.millis % 86'400'000 != 0) --d;
    return {d};
}

constexpr SimInstant floor_to_day(SimInstant t) { return day_of(t).start(); }

SimInstant make_instant(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                        int second = 0, int millis = 0);

/// ISO-8601 UTC with millisecond precision, e.g. 2012-11-29T00:00:00.000Z.
std::string to_iso(SimInstant t);
/// Accepts the format produced by to_iso. Throws std::invalid_argument otherwise.
SimInstant parse_iso(std::string_view text);

/// YYYY-MM-DD
std::string to_iso_date(SimDay day);
SimDay parse_iso_date(std::string_view text);

/// Default simulation window: 2010-01-01T00:00:00.000Z .. 2012-12-31T23:59:59.999Z.
inline SimInstant default_simulation_start() { return make_instant(2010, 1, 1); }
inline SimInstant default_simulation_end() { return make_instant(2012, 12, 31, 23, 59, 59, 999); }

} // namespace snb
