#include "blindtrade/execution/executor.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "blindtrade/core/error.hpp"

namespace blindtrade::execution {

std::string_view side_name(Side s) { return s == Side::Buy ? "BUY" : "SELL"; }

std::string_view reject_code_name(RejectCode c) {
    switch (c) {
        case RejectCode::LimitUpBuy: return "LIMIT_UP_BUY";
        case RejectCode::LimitDownSell: return "LIMIT_DOWN_SELL";
        case RejectCode::T1Locked: return "T1_LOCKED";
        case RejectCode::InsufficientCash: return "INSUFFICIENT_CASH";
        case RejectCode::InsufficientShares: return "INSUFFICIENT_SHARES";
        case RejectCode::NotInUniverse: return "NOT_IN_UNIVERSE";
        case RejectCode::UnfillableOneSided: return "UNFILLABLE_ONE_SIDED";
        case RejectCode::Schema: return "SCHEMA";
    }
    return "SCHEMA";
}

namespace {

constexpr double kPriceTol = 1e-12;

bool at_or_above(double price, double level) { return price >= level * (1.0 - kPriceTol); }
bool at_or_below(double price, double level) { return price <= level * (1.0 + kPriceTol); }

struct Valuation {
    std::map<std::string, double> price;  // per held or traded ticker
    double of(const std::string& t, const QuoteSource& quotes, const FallbackPrice& fallback) {
        if (auto it = price.find(t); it != price.end()) return it->second;
        const auto q = quotes(t);
        const double p = q ? q->open : fallback(t);
        price.emplace(t, p);
        return p;
    }
};

std::map<std::string, double> weights(const Account& a, Valuation& v, const QuoteSource& q, const FallbackPrice& f) {
    double nav = a.cash.cny();
    std::map<std::string, double> value;
    for (const auto& [t, p] : a.positions) {
        const double x = static_cast<double>(p.shares_total) * v.of(t, q, f);
        value[t] = x;
        nav += x;
    }
    if (nav > 0.0)
        for (auto& [t, x] : value) x /= nav;
    return value;
}

}  // namespace

StepResult execute(Account& account, std::span<const Order> orders, const QuoteSource& quotes,
                   const FallbackPrice& fallback, const CostModel& costs, data::DayIndex day) {
    StepResult result;
    account.unlock_all();

    // Decision-time valuation: previous closes, the last prices the agent could know.
    std::map<std::string, double> est_price;
    auto estimate = [&](const std::string& t) {
        if (auto it = est_price.find(t); it != est_price.end()) return it->second;
        const auto q = quotes(t);
        const double p = q ? q->prev_close : fallback(t);
        est_price.emplace(t, p);
        return p;
    };
    double nav_est = account.cash.cny();
    for (const auto& [t, p] : account.positions) nav_est += static_cast<double>(p.shares_total) * estimate(t);

    Valuation fill_prices;
    const auto pre = weights(account, fill_prices, quotes, fallback);

    auto reject = [&](std::size_t i, RejectCode code, std::string detail) {
        result.rejections.push_back(Rejection{i, orders[i], code, std::move(detail), day});
    };

    for (std::size_t i = 0; i < orders.size(); ++i) {
        const Order& o = orders[i];
        if (o.target_weight.has_value() == o.shares.has_value()) {
            reject(i, RejectCode::Schema, "exactly one of target_weight or shares is required");
            continue;
        }
        if (o.target_weight && (*o.target_weight < 0.0 || *o.target_weight > 1.0 || !std::isfinite(*o.target_weight))) {
            reject(i, RejectCode::Schema, "target_weight outside [0, 1]");
            continue;
        }
        if (o.shares && *o.shares <= 0) {
            reject(i, RejectCode::Schema, "shares must be positive");
            continue;
        }
        const auto q = quotes(o.ticker);
        if (!q) {
            reject(i, RejectCode::NotInUniverse, "not tradable on the execution day");
            continue;
        }
        const double up = q->prev_close * (1.0 + q->limit_pct);
        const double dn = q->prev_close * (1.0 - q->limit_pct);
        if (q->open == q->high && q->open == q->low && (at_or_above(q->open, up) || at_or_below(q->open, dn))) {
            reject(i, RejectCode::UnfillableOneSided, "one-sided limit day");
            continue;
        }

        auto pos_it = account.positions.find(o.ticker);
        const std::int64_t held = pos_it == account.positions.end() ? 0 : pos_it->second.shares_total;
        const double px_est = estimate(o.ticker);
        const double price = q->open;

        if (o.side == Side::Buy) {
            if (at_or_above(price, up)) {
                reject(i, RejectCode::LimitUpBuy, "open at or above the upper limit threshold");
                continue;
            }
            std::int64_t want = 0;
            if (o.shares) {
                want = (*o.shares / costs.lot) * costs.lot;
                if (want == 0) {
                    reject(i, RejectCode::Schema, "BUY shares below one round lot");
                    continue;
                }
            } else {
                const double delta = *o.target_weight * nav_est - static_cast<double>(held) * px_est;
                want = static_cast<std::int64_t>(std::floor(delta / px_est / static_cast<double>(costs.lot))) * costs.lot;
                if (want <= 0) {
                    reject(i, RejectCode::Schema, "BUY target_weight at or below the current weight");
                    continue;
                }
            }
            std::int64_t qty = want;
            auto total_cost = [&](std::int64_t n) {
                const Money amt = notional(n, price);
                return amt + proportional_cost(amt, costs.buy_bps, costs.min_cost);
            };
            if (total_cost(qty) > account.cash) {
                const Money budget = account.cash - Money::from_cny(costs.cash_buffer * nav_est);
                const double per_lot = price * static_cast<double>(costs.lot) * (1.0 + static_cast<double>(costs.buy_bps) / 1e4);
                std::int64_t lots = budget.cents > 0 ? static_cast<std::int64_t>(std::floor(budget.cny() / per_lot)) : 0;
                lots = std::min(lots, want / costs.lot);
                while (lots > 0 && total_cost(lots * costs.lot) > budget) --lots;
                qty = lots * costs.lot;
                if (qty == 0) {
                    reject(i, RejectCode::InsufficientCash, "cannot afford one round lot");
                    continue;
                }
            }
            const Money amt = notional(qty, price);
            const Money fee = proportional_cost(amt, costs.buy_bps, costs.min_cost);
            account.cash -= amt + fee;
            auto& pos = account.positions[o.ticker];
            pos.shares_total += qty;
            pos.cost_basis += amt;
            result.fills.push_back(Fill{i, o.ticker, o.side, qty, want, price, amt, fee, day});
        } else {
            if (at_or_below(price, dn)) {
                reject(i, RejectCode::LimitDownSell, "open at or below the lower limit threshold");
                continue;
            }
            if (held == 0) {
                reject(i, RejectCode::InsufficientShares, "no position to sell");
                continue;
            }
            auto& pos = pos_it->second;
            std::int64_t qty = 0;
            if (o.shares) {
                if (*o.shares > held) {
                    reject(i, RejectCode::InsufficientShares, "SELL exceeds shares held");
                    continue;
                }
                if (*o.shares > pos.shares_available) {
                    reject(i, RejectCode::T1Locked, "shares bought this step are locked until the next step");
                    continue;
                }
                qty = *o.shares;
            } else {
                const double delta = *o.target_weight * nav_est - static_cast<double>(held) * px_est;
                if (*o.target_weight == 0.0) {
                    qty = held;
                } else {
                    const auto lots = static_cast<std::int64_t>(std::floor(delta / px_est / static_cast<double>(costs.lot)));
                    if (lots >= 0) {
                        reject(i, RejectCode::Schema, "SELL target_weight at or above the current weight");
                        continue;
                    }
                    qty = std::min(-lots * costs.lot, held);
                }
                if (pos.shares_available == 0) {
                    reject(i, RejectCode::T1Locked, "shares bought this step are locked until the next step");
                    continue;
                }
                qty = std::min(qty, pos.shares_available);
            }
            const Money amt = notional(qty, price);
            const Money fee = proportional_cost(amt, costs.sell_bps, costs.min_cost);
            if (account.cash + amt - fee < Money{}) {
                reject(i, RejectCode::InsufficientCash, "sell proceeds do not cover the minimum cost");
                continue;
            }
            account.cash += amt - fee;
            const double frac = static_cast<double>(qty) / static_cast<double>(pos.shares_total);
            pos.cost_basis -= Money::from_cny(pos.cost_basis.cny() * frac);
            pos.shares_total -= qty;
            pos.shares_available -= qty;
            const std::int64_t intended = o.shares ? *o.shares : qty;
            result.fills.push_back(Fill{i, o.ticker, o.side, qty, intended, price, amt, fee, day});
            if (pos.shares_total == 0) account.positions.erase(pos_it);
        }
    }

    const auto post = weights(account, fill_prices, quotes, fallback);
    std::set<std::string> names;
    for (const auto& [t, w] : pre) names.insert(t);
    for (const auto& [t, w] : post) names.insert(t);
    for (const auto& t : names) {
        const double a = pre.contains(t) ? pre.at(t) : 0.0;
        const double b = post.contains(t) ? post.at(t) : 0.0;
        result.turnover += std::abs(b - a);
    }
    return result;
}

QuoteSource store_quotes(const data::MarketStore& store, data::DayIndex day) {
    return [&store, day](const std::string& ticker) -> std::optional<Quote> {
        const auto id = store.id_of(ticker);
        if (!id || !store.is_member(*id, day)) return std::nullopt;
        const auto* b = store.bar(*id, day);
        const auto prev = store.last_bar_before(*id, day);
        if (!b || !prev) return std::nullopt;
        return Quote{b->open, b->high, b->low, store.bar(*id, *prev)->close, store.board(*id).limit_pct};
    };
}

FallbackPrice last_close_before(const data::MarketStore& store, data::DayIndex day) {
    return [&store, day](const std::string& ticker) {
        const auto id = store.id_of(ticker);
        if (!id) return 0.0;
        const auto prev = store.last_bar_before(*id, day);
        return prev ? store.bar(*id, *prev)->close : 0.0;
    };
}

StepResult step(Account& account, std::span<const Order> orders, data::DayIndex day, const data::MarketStore& store,
                const CostModel& costs) {
    if (!store.calendar().contains(day) || day < 1)
        throw PreconditionError("execution day must have a previous trading day in the calendar");
    return execute(account, orders, store_quotes(store, day), last_close_before(store, day), costs, day);
}

Money mark(Account& account, data::DayIndex day, const data::MarketStore& store) {
    NavPoint pt;
    pt.day = day;
    pt.cash = account.cash;
    Money nav = account.cash;
    for (const auto& [t, p] : account.positions) {
        Holding h{t, p.shares_total, 0.0, false};
        const auto id = store.id_of(t);
        if (id && store.bar(*id, day)) {
            h.price = store.bar(*id, day)->close;
        } else {
            h.stale = true;
            const auto prev = id ? store.last_bar_before(*id, day) : std::nullopt;
            h.price = prev ? store.bar(*id, *prev)->close : 0.0;
        }
        nav += notional(h.shares, h.price);
        pt.holdings.push_back(std::move(h));
    }
    pt.nav = nav;
    account.nav_series.push_back(std::move(pt));
    return nav;
}

std::vector<Order> score_portfolio_step(const std::map<std::string, double>& scores,
                                        const std::map<std::string, double>& current_weights, std::size_t k,
                                        double threshold) {
    if (k == 0 || k > scores.size())
        throw PreconditionError("score_portfolio_step: k=" + std::to_string(k) + " exceeds the scored universe of " +
                                std::to_string(scores.size()));
    std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::set<std::string> target;
    for (std::size_t r = 0; r < k; ++r) target.insert(ranked[r].first);

    const double unit = 1.0 / static_cast<double>(k);
    const double min_change = threshold * unit;
    std::vector<Order> sells, buys;
    for (const auto& [t, w] : current_weights) {
        if (w <= 0.0 || target.contains(t) || w < min_change) continue;
        sells.push_back(Order{t, Side::Sell, 0.0, std::nullopt, 0.5, "dropped out of the top-" + std::to_string(k) + " by score"});
    }
    for (std::size_t r = 0; r < k; ++r) {
        const auto& t = ranked[r].first;
        const auto it = current_weights.find(t);
        const double w = it == current_weights.end() ? 0.0 : it->second;
        if (w > 0.0 || unit - w < min_change) continue;
        buys.push_back(Order{t, Side::Buy, unit, std::nullopt, 0.5, "score rank #" + std::to_string(r + 1) + " enters the book"});
    }
    sells.insert(sells.end(), buys.begin(), buys.end());
    return sells;
}

}  // namespace blindtrade::execution
