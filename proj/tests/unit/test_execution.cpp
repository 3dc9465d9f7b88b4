#include <gtest/gtest.h>

#include <random>

#include "blindtrade/core/error.hpp"
#include "blindtrade/execution/executor.hpp"
#include "fixtures.hpp"

using namespace blindtrade;
using namespace blindtrade::execution;

namespace {

Order buy_shares(std::string t, std::int64_t n) { return Order{std::move(t), Side::Buy, std::nullopt, n, 0.5, ""}; }
Order sell_shares(std::string t, std::int64_t n) { return Order{std::move(t), Side::Sell, std::nullopt, n, 0.5, ""}; }

struct Book {
    std::map<std::string, Quote> quotes;
    QuoteSource source() const {
        return [this](const std::string& t) -> std::optional<Quote> {
            const auto it = quotes.find(t);
            return it == quotes.end() ? std::nullopt : std::optional<Quote>(it->second);
        };
    }
    FallbackPrice fallback() const {
        return [](const std::string&) { return 0.0; };
    }
    StepResult run(Account& a, std::vector<Order> orders) const {
        return execute(a, orders, source(), fallback(), CostModel{}, 1);
    }
};

Quote q(double open, double prev = 10.0, double limit = 0.095) { return Quote{open, open + 0.05, open - 0.05, prev, limit}; }

}  // namespace

TEST(Costs, MinimumAndBps) {
    const Money min = Money::from_cny(5.0);
    EXPECT_EQ(proportional_cost(Money::from_cny(1000.0), 5, min), Money::from_cny(5.0));
    EXPECT_EQ(proportional_cost(Money::from_cny(10000.0), 5, min), Money::from_cny(5.0));
    EXPECT_EQ(proportional_cost(Money::from_cny(1'000'000.0), 5, min), Money::from_cny(500.0));
    EXPECT_EQ(proportional_cost(Money::from_cny(10000.0), 15, min), Money::from_cny(15.0));
    EXPECT_EQ(proportional_cost(Money::from_cny(123'456.78), 15, min).cents, 18519);  // 18518.517 cents
    EXPECT_EQ(proportional_cost(Money::from_cents(1'003'000), 15, min).cents, 1505);     // 1504.5 cents, half up
}

TEST(Execute, BuyFillsAtOpenWithCosts) {
    Book b;
    b.quotes["SH600000"] = q(10.10);
    Account a;
    const auto r = b.run(a, {buy_shares("SH600000", 1000)});
    ASSERT_EQ(r.fills.size(), 1u);
    EXPECT_EQ(r.fills[0].notional, Money::from_cny(10100.0));
    EXPECT_EQ(r.fills[0].cost, Money::from_cny(5.05));
    EXPECT_EQ(a.cash, Money::from_cny(1'000'000.0 - 10100.0 - 5.05));
    EXPECT_EQ(a.positions.at("SH600000").shares_total, 1000);
    EXPECT_EQ(a.positions.at("SH600000").shares_available, 0);
}

TEST(Execute, SmallBuyPaysMinimumCost) {
    Book b;
    b.quotes["SH600000"] = q(10.0);
    Account a;
    const auto r = b.run(a, {buy_shares("SH600000", 150)});
    ASSERT_EQ(r.fills.size(), 1u);
    EXPECT_EQ(r.fills[0].shares, 100);
    EXPECT_EQ(r.fills[0].cost, Money::from_cny(5.0));
}

struct LimitCase {
    const char* ticker;
    double limit;
    double at;      // open exactly on the upper threshold
    double inside;  // one tick inside
};

void PrintTo(const LimitCase& c, std::ostream* os) { *os << c.ticker; }

class LimitThresholds : public ::testing::TestWithParam<LimitCase> {};

TEST_P(LimitThresholds, BoundaryIsRejected) {
    const auto c = GetParam();
    Book b;
    Account a;
    b.quotes[c.ticker] = q(c.at, 10.0, c.limit);
    auto r = b.run(a, {buy_shares(c.ticker, 100)});
    ASSERT_EQ(r.rejections.size(), 1u);
    EXPECT_EQ(r.rejections[0].code, RejectCode::LimitUpBuy);

    b.quotes[c.ticker] = q(c.inside, 10.0, c.limit);
    r = b.run(a, {buy_shares(c.ticker, 100)});
    EXPECT_EQ(r.fills.size(), 1u);

    a.unlock_all();
    b.quotes[c.ticker] = q(20.0 - c.at, 10.0, c.limit);
    r = b.run(a, {sell_shares(c.ticker, 100)});
    ASSERT_EQ(r.rejections.size(), 1u);
    EXPECT_EQ(r.rejections[0].code, RejectCode::LimitDownSell);

    b.quotes[c.ticker] = q(20.0 - c.inside, 10.0, c.limit);
    r = b.run(a, {sell_shares(c.ticker, 100)});
    EXPECT_EQ(r.fills.size(), 1u);
}

INSTANTIATE_TEST_SUITE_P(Boards, LimitThresholds,
                         ::testing::Values(LimitCase{"SH600000", 0.095, 10.95, 10.94},
                                           LimitCase{"SZ300001", 0.195, 11.95, 11.94},
                                           LimitCase{"BJ830001", 0.295, 12.95, 12.94}),
                         [](const auto& info) { return std::string(info.param.ticker); });

TEST(Execute, OneSidedDayIsUnfillableBothWays) {
    Book b;
    Account a;
    b.quotes["SH600000"] = q(10.0);
    b.run(a, {buy_shares("SH600000", 200)});
    b.quotes["SH600000"] = Quote{11.0, 11.0, 11.0, 10.0, 0.095};
    const auto r = b.run(a, {buy_shares("SH600000", 100), sell_shares("SH600000", 100)});
    ASSERT_EQ(r.rejections.size(), 2u);
    for (const auto& rej : r.rejections) EXPECT_EQ(rej.code, RejectCode::UnfillableOneSided);
    b.quotes["SH600000"] = Quote{9.0, 9.0, 9.0, 10.0, 0.095};
    EXPECT_EQ(b.run(a, {sell_shares("SH600000", 100)}).rejections.at(0).code, RejectCode::UnfillableOneSided);
}

TEST(Execute, TPlusOneLocksSameStepBuys) {
    Book b;
    b.quotes["SH600000"] = q(10.0);
    Account a;
    auto r = b.run(a, {buy_shares("SH600000", 300), sell_shares("SH600000", 100),
                       Order{"SH600000", Side::Sell, 0.0, std::nullopt, 0.5, ""}});
    EXPECT_EQ(r.fills.size(), 1u);
    ASSERT_EQ(r.rejections.size(), 2u);
    EXPECT_EQ(r.rejections[0].code, RejectCode::T1Locked);
    EXPECT_EQ(r.rejections[1].code, RejectCode::T1Locked);
    r = b.run(a, {sell_shares("SH600000", 100)});
    EXPECT_EQ(r.fills.size(), 1u);
    EXPECT_EQ(a.positions.at("SH600000").shares_total, 200);
}

TEST(Execute, RejectionCodes) {
    Book b;
    b.quotes["SH600000"] = q(10.0);
    Account a(Money::from_cny(500.0));
    Order both{"SH600000", Side::Buy, 0.1, 100, 0.5, ""};
    Order neither{"SH600000", Side::Buy, std::nullopt, std::nullopt, 0.5, ""};
    const auto r = b.run(a, {both, neither, buy_shares("SZ000404", 100), sell_shares("SH600000", 100),
                             buy_shares("SH600000", 100), buy_shares("SH600000", 50)});
    ASSERT_EQ(r.rejections.size(), 6u);
    EXPECT_EQ(r.rejections[0].code, RejectCode::Schema);
    EXPECT_EQ(r.rejections[1].code, RejectCode::Schema);
    EXPECT_EQ(r.rejections[2].code, RejectCode::NotInUniverse);
    EXPECT_EQ(r.rejections[3].code, RejectCode::InsufficientShares);
    EXPECT_EQ(r.rejections[4].code, RejectCode::InsufficientCash);
    EXPECT_EQ(r.rejections[5].code, RejectCode::Schema);
    EXPECT_EQ(a.cash, Money::from_cny(500.0));
}

TEST(Execute, PartialFillWhenCashShort) {
    Book b;
    b.quotes["SH600000"] = q(10.0);
    Account a(Money::from_cny(5000.0));
    const auto r = b.run(a, {buy_shares("SH600000", 1000)});
    ASSERT_EQ(r.fills.size(), 1u);
    EXPECT_EQ(r.fills[0].intended_shares, 1000);
    EXPECT_EQ(r.fills[0].shares, 400);
    EXPECT_GE(a.cash.cents, 0);
}

TEST(Execute, TargetWeightUsesPreviousClose) {
    Book b;
    b.quotes["SH600000"] = q(10.5, 10.0);
    Account a;
    const auto r = b.run(a, {Order{"SH600000", Side::Buy, 0.1, std::nullopt, 0.5, ""}});
    ASSERT_EQ(r.fills.size(), 1u);
    EXPECT_EQ(r.fills[0].shares, 10000);  // 0.1 * 1e6 / 10.0
    EXPECT_NEAR(r.turnover, 105000.0 / (1e6 - 52.5), 1e-12);
}

TEST(Execute, CashConservationFuzz) {
    std::mt19937_64 rng(17);
    const std::vector<std::string> names{"SH600000", "SH600001", "SZ300001", "BJ830001", "SZ000002"};
    Book b;
    Account a;
    std::map<std::string, double> prev;
    for (const auto& t : names) prev[t] = 10.0;
    for (int step = 0; step < 1000; ++step) {
        for (const auto& t : names) {
            const double lim = t.starts_with("SZ3") ? 0.195 : t.starts_with("BJ") ? 0.295 : 0.095;
            std::uniform_real_distribution<double> mv(-lim * 1.05, lim * 1.05);
            const double open = std::max(0.5, std::round(prev[t] * (1.0 + mv(rng)) * 100.0) / 100.0);
            const bool locked = std::uniform_int_distribution<int>(0, 9)(rng) == 0;
            b.quotes[t] = locked ? Quote{open, open, open, prev[t], lim} : Quote{open, open * 1.01, open * 0.99, prev[t], lim};
            prev[t] = open;
        }
        std::vector<Order> orders;
        const int n = std::uniform_int_distribution<int>(0, 6)(rng);
        for (int k = 0; k < n; ++k) {
            Order o;
            o.ticker = names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)];
            o.side = std::bernoulli_distribution(0.5)(rng) ? Side::Buy : Side::Sell;
            if (std::bernoulli_distribution(0.5)(rng))
                o.shares = std::uniform_int_distribution<std::int64_t>(1, 30000)(rng);
            else
                o.target_weight = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
            orders.push_back(o);
        }
        const Money before = a.cash;
        std::map<std::string, std::int64_t> shares_before;
        for (const auto& [t, p] : a.positions) shares_before[t] = p.shares_total;
        const auto r = b.run(a, orders);
        ASSERT_EQ(r.fills.size() + r.rejections.size(), orders.size());
        Money expect = before;
        std::map<std::string, std::int64_t> shares = shares_before;
        for (const auto& f : r.fills) {
            EXPECT_EQ(f.notional, notional(f.shares, f.price));
            const auto bps = f.side == Side::Buy ? 5 : 15;
            EXPECT_EQ(f.cost, proportional_cost(f.notional, bps, Money::from_cny(5.0)));
            expect += f.side == Side::Buy ? Money{} - f.notional - f.cost : f.notional - f.cost;
            shares[f.ticker] += f.side == Side::Buy ? f.shares : -f.shares;
            EXPECT_EQ(f.shares % 100, f.side == Side::Buy ? 0 : f.shares % 100);
        }
        ASSERT_EQ(a.cash, expect) << "step " << step;
        ASSERT_GE(a.cash.cents, 0);
        for (const auto& [t, n] : shares) {
            const auto it = a.positions.find(t);
            ASSERT_EQ(it == a.positions.end() ? 0 : it->second.shares_total, n);
        }
    }
}

TEST(Execute, StepUsesStoreQuotesAndMarks) {
    auto store = bt_test::StoreBuilder(5)
                     .flat("SH600000", 10.0)
                     .bar("SH600000", 2, 10.2, 10.5, 10.1, 10.4)
                     .flat("SZ000001", 5.0, 0, 1)
                     .build();
    Account a;
    auto r = step(a, std::vector<Order>{buy_shares("SH600000", 1000), buy_shares("SZ000001", 100)}, 2, store);
    ASSERT_EQ(r.fills.size(), 1u);
    EXPECT_EQ(r.fills[0].price, 10.2);
    EXPECT_EQ(r.rejections.at(0).code, RejectCode::NotInUniverse);
    const Money nav = mark(a, 2, store);
    EXPECT_EQ(nav, a.cash + notional(1000, 10.4));
    EXPECT_THROW(step(a, {}, 0, store), PreconditionError);
}

TEST(ScorePortfolio, TopKWithSuppression) {
    const std::map<std::string, double> scores{{"A", 3}, {"B", 2}, {"C", 1}, {"D", 0}};
    auto orders = score_portfolio_step(scores, {{"C", 0.5}, {"A", 0.5}}, 2, 0.0);
    ASSERT_EQ(orders.size(), 2u);
    EXPECT_EQ(orders[0].ticker, "C");
    EXPECT_EQ(orders[0].side, Side::Sell);
    EXPECT_EQ(*orders[0].target_weight, 0.0);
    EXPECT_EQ(orders[1].ticker, "B");
    EXPECT_EQ(*orders[1].target_weight, 0.5);
    orders = score_portfolio_step(scores, {{"C", 0.01}}, 2, 0.05);
    ASSERT_EQ(orders.size(), 2u);
    EXPECT_EQ(orders[0].ticker, "A");
    EXPECT_THROW(score_portfolio_step(scores, {}, 5, 0.0), PreconditionError);
}
