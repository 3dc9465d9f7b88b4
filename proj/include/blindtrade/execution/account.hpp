#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "blindtrade/core/money.hpp"
#include "blindtrade/data/calendar.hpp"

namespace blindtrade::execution {

struct Position {
    std::int64_t shares_total = 0;
    /// T+1: shares bought during the current step stay locked until the next step.
    std::int64_t shares_available = 0;
    /// Gross purchase notional still attributed to the open shares.
    Money cost_basis;

    double avg_cost() const { return shares_total ? cost_basis.cny() / static_cast<double>(shares_total) : 0.0; }
};

struct Holding {
    std::string ticker;
    std::int64_t shares = 0;
    double price = 0.0;  // mark price (close)
    bool stale = false;  // no bar on the mark day; last known close used
};

/// End-of-day snapshot.
struct NavPoint {
    data::DayIndex day = 0;
    Money nav;
    Money cash;
    std::vector<Holding> holdings;
};

/// Long-only cash account. Invariants: cash >= 0 after every fill,
/// 0 <= shares_available <= shares_total, positions with zero shares are removed.
struct Account {
    explicit Account(Money initial = Money::from_cny(1'000'000.0)) : initial_cash(initial), cash(initial) {}

    Money initial_cash;
    Money cash;
    std::map<std::string, Position> positions;
    std::vector<NavPoint> nav_series;

    /// Marks every position sellable; called at the start of each step.
    void unlock_all() {
        for (auto& [t, p] : positions) p.shares_available = p.shares_total;
    }
};

}  // namespace blindtrade::execution
