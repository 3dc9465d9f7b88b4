#pragma once

#include <string>

#include "blindtrade/core/date.hpp"

namespace blindtrade::data {

/// One daily OHLCV bar; prices in CNY, volume in shares, amount in CNY.
struct DailyBar {
    double open = 0, high = 0, low = 0, close = 0;
    double volume = 0;
    double amount = 0;

    friend bool operator==(const DailyBar&, const DailyBar&) = default;
};

struct Bar {
    std::string ticker;
    Date date;
    DailyBar values;
};

/// Empty string when the bar satisfies low <= min(o,c) <= max(o,c) <= high,
/// positive prices and non-negative volume/amount; otherwise the violated rule.
std::string check_bar(const DailyBar& b);

}  // namespace blindtrade::data
