#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blindtrade/core/date.hpp"

namespace blindtrade::data {

/// Index of a trading day within a TradingCalendar.
using DayIndex = int;

/// Ordered trading days with lookup in both directions.
class TradingCalendar {
public:
    TradingCalendar() = default;
    /// Throws DataError unless `days` is strictly increasing.
    explicit TradingCalendar(std::vector<Date> days);

    static TradingCalendar load(const std::string& path);

    std::size_t size() const { return days_.size(); }
    bool empty() const { return days_.empty(); }
    bool contains(DayIndex i) const { return i >= 0 && static_cast<std::size_t>(i) < days_.size(); }

    const Date& at(DayIndex i) const;
    std::optional<DayIndex> index_of(const Date& d) const;
    /// First trading day on or after `d`.
    std::optional<DayIndex> on_or_after(const Date& d) const;
    /// Last trading day on or before `d`.
    std::optional<DayIndex> on_or_before(const Date& d) const;

    std::span<const Date> days() const { return days_; }

    friend bool operator==(const TradingCalendar&, const TradingCalendar&) = default;

private:
    std::vector<Date> days_;
};

}  // namespace blindtrade::data
