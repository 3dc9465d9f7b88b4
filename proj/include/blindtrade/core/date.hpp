#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace blindtrade {

/// Calendar date at day resolution. ISO-8601 (YYYY-MM-DD) only at I/O boundaries.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days d) : days_(d) {}
    Date(int y, unsigned m, unsigned d);

    /// Throws std::invalid_argument on anything other than a valid YYYY-MM-DD.
    static Date parse_iso(std::string_view text);
    static bool looks_like_iso(std::string_view text);

    std::string iso() const;
    constexpr std::chrono::sys_days sys() const { return days_; }
    unsigned weekday() const;  // 0 = Sunday

    Date operator+(int n) const { return Date(days_ + std::chrono::days{n}); }
    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

}  // namespace blindtrade
