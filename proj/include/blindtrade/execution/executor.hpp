#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blindtrade/data/market_store.hpp"
#include "blindtrade/execution/account.hpp"
#include "blindtrade/execution/order.hpp"

namespace blindtrade::execution {

struct CostModel {
    std::int64_t buy_bps = 5;
    std::int64_t sell_bps = 15;
    Money min_cost = Money::from_cents(500);
    std::int64_t lot = 100;
    /// Cash left untouched when a BUY has to be cut down to what is affordable.
    double cash_buffer = 0.01;
};

/// What the executor needs to know about one ticker on the execution day.
struct Quote {
    double open = 0, high = 0, low = 0;
    double prev_close = 0;
    double limit_pct = 0.095;
};

/// nullopt: the ticker cannot be traded that day (not a member, suspended, unknown).
using QuoteSource = std::function<std::optional<Quote>(const std::string& ticker)>;
/// Mark price for a held ticker that has no quote (last known close).
using FallbackPrice = std::function<double(const std::string& ticker)>;

struct StepResult {
    std::vector<Fill> fills;
    std::vector<Rejection> rejections;
    /// Sum of |post-trade weight - pre-trade weight| at fill prices.
    double turnover = 0.0;
};

/// Processes `orders` strictly in the given sequence against explicit quotes.
/// Every order yields exactly one Fill or one Rejection; nothing throws.
StepResult execute(Account& account, std::span<const Order> orders, const QuoteSource& quotes,
                   const FallbackPrice& fallback, const CostModel& costs, data::DayIndex day);

/// Quotes for execution day `day` from the store: fill at open[day], limits
/// against the previous close, membership and suspension checks.
QuoteSource store_quotes(const data::MarketStore& store, data::DayIndex day);
FallbackPrice last_close_before(const data::MarketStore& store, data::DayIndex day);

/// Executes at the open of `day`; the agent's information ends at close[day - 1].
StepResult step(Account& account, std::span<const Order> orders, data::DayIndex day, const data::MarketStore& store,
                const CostModel& costs = {});

/// Appends the end-of-day NAV at close[day] (last known close for suspended names).
Money mark(Account& account, data::DayIndex day, const data::MarketStore& store);

/// Equal-weight top-k book with cost-aware suppression: drops become SELLs to zero,
/// adds become BUYs at 1/k, and any trade whose weight change is below threshold / k
/// is skipped. SELLs precede BUYs. Throws PreconditionError when k exceeds the scored universe.
std::vector<Order> score_portfolio_step(const std::map<std::string, double>& scores,
                                        const std::map<std::string, double>& current_weights, std::size_t k,
                                        double threshold);

}  // namespace blindtrade::execution
