#include "blindtrade/data/bar.hpp"

#include <algorithm>
#include <cmath>

namespace blindtrade::data {

std::string check_bar(const DailyBar& b) {
    for (double p : {b.open, b.high, b.low, b.close})
        if (!std::isfinite(p) || p <= 0.0) return "prices must be positive";
    if (!std::isfinite(b.volume) || b.volume < 0.0) return "volume must be non-negative";
    if (!std::isfinite(b.amount) || b.amount < 0.0) return "amount must be non-negative";
    if (b.high < b.low) return "high < low";
    if (b.low > std::min(b.open, b.close)) return "low above min(open, close)";
    if (std::max(b.open, b.close) > b.high) return "high below max(open, close)";
    return {};
}

}  // namespace blindtrade::data
