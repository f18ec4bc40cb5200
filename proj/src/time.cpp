#include "snb/time.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace snb {

namespace {

using namespace std::chrono;

int parse_int(std::string_view text, std::size_t pos, std::size_t len) {
    if (pos + len > text.size()) throw std::invalid_argument("timestamp too short");
    int value = 0;
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len)
        throw std::invalid_argument("bad timestamp field in '" + std::string(text) + "'");
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
    if (pos >= text.size() || text[pos] != c)
        throw std::invalid_argument("malformed timestamp '" + std::string(text) + "'");
}

SimDay checked_day(int y, int m, int d, std::string_view text) {
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw std::invalid_argument("invalid date '" + std::string(text) + "'");
    return {sys_days{ymd}.time_since_epoch().count()};
}

} // namespace

SimInstant make_instant(int y, unsigned mo, unsigned d, int h, int mi, int s, int ms) {
    const sys_days days{year{y} / month{mo} / day{d}};
    const auto tp = days + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
    return {duration_cast<milliseconds>(tp.time_since_epoch()).count()};
}

std::string to_iso_date(SimDay sd) {
    const year_month_day ymd{sys_days{days{sd.days_since_epoch}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string to_iso(SimInstant t) {
    const SimDay sd = day_of(t);
    const std::int64_t in_day = t.millis - sd.start().millis;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d.%03dZ", to_iso_date(sd).c_str(),
                  static_cast<int>(in_day / 3'600'000), static_cast<int>(in_day / 60'000 % 60),
                  static_cast<int>(in_day / 1000 % 60), static_cast<int>(in_day % 1000));
    return buf;
}

SimDay parse_iso_date(std::string_view text) {
    if (text.size() != 10) throw std::invalid_argument("malformed date '" + std::string(text) + "'");
    expect_char(text, 4, '-');
    expect_char(text, 7, '-');
    return checked_day(parse_int(text, 0, 4), parse_int(text, 5, 2), parse_int(text, 8, 2), text);
}

SimInstant parse_iso(std::string_view text) {
    if (text.size() != 24) throw std::invalid_argument("malformed timestamp '" + std::string(text) + "'");
    const SimDay sd = parse_iso_date(text.substr(0, 10));
    expect_char(text, 10, 'T');
    expect_char(text, 13, ':');
    expect_char(text, 16, ':');
    expect_char(text, 19, '.');
    expect_char(text, 23, 'Z');
    const int h = parse_int(text, 11, 2), mi = parse_int(text, 14, 2), s = parse_int(text, 17, 2),
              ms = parse_int(text, 20, 3);
    if (h > 23 || mi > 59 || s > 59)
        throw std::invalid_argument("time out of range in '" + std::string(text) + "'");
    return sd.start() + SimDuration{((h * 60LL + mi) * 60 + s) * 1000 + ms};
}

} // namespace snb
