#include "blindtrade/core/date.hpp"

#include <cstdio>
#include <stdexcept>

namespace blindtrade {

Date::Date(int y, unsigned m, unsigned d) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
    days_ = std::chrono::sys_days{ymd};
}

bool Date::looks_like_iso(std::string_view t) {
    if (t.size() != 10 || t[4] != '-' || t[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (t[i] < '0' || t[i] > '9') return false;
    return true;
}

Date Date::parse_iso(std::string_view t) {
    if (!looks_like_iso(t)) throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(t) + "'");
    auto num = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (t[i] - '0');
        return v;
    };
    const int y = num(0, 4);
    const auto m = static_cast<unsigned>(num(5, 2));
    const auto d = static_cast<unsigned>(num(8, 2));
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date '" + std::string(t) + "'");
    return Date(std::chrono::sys_days{ymd});
}

std::string Date::iso() const {
    const std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

unsigned Date::weekday() const { return std::chrono::weekday{days_}.c_encoding(); }

}  // namespace blindtrade
