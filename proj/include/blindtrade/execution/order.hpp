#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "blindtrade/core/money.hpp"
#include "blindtrade/data/calendar.hpp"

namespace blindtrade::execution {

enum class Side { Buy, Sell };

std::string_view side_name(Side s);

/// An order on a real ticker. Exactly one of target_weight / shares is set.
struct Order {
    std::string ticker;
    Side side = Side::Buy;
    std::optional<double> target_weight;
    std::optional<std::int64_t> shares;
    double confidence = 0.5;
    std::string reason;
};

enum class RejectCode {
    LimitUpBuy,
    LimitDownSell,
    T1Locked,
    InsufficientCash,
    InsufficientShares,
    NotInUniverse,
    UnfillableOneSided,
    Schema,
};

std::string_view reject_code_name(RejectCode c);

struct Fill {
    std::size_t order_index = 0;
    std::string ticker;
    Side side = Side::Buy;
    std::int64_t shares = 0;
    /// Shares the order resolved to before any cash-driven partial fill.
    std::int64_t intended_shares = 0;
    double price = 0.0;
    Money notional;
    Money cost;
    data::DayIndex day = 0;
};

struct Rejection {
    std::size_t order_index = 0;
    Order order;
    RejectCode code = RejectCode::Schema;
    std::string detail;
    data::DayIndex day = 0;
};

}  // namespace blindtrade::execution
