#include <gtest/gtest.h>

#include "blindtrade/data/synth.hpp"
#include "blindtrade/masking/mask.hpp"
#include "blindtrade/tools/tools.hpp"

using namespace blindtrade;
using namespace blindtrade::tools;
using masking::MaskLevel;

namespace {

struct Fixture {
    data::MarketStore store = data::synth_market({.seed = 21, .n_stocks = 30, .n_days = 320});
    std::shared_ptr<const data::TradingCalendar> cal = std::make_shared<data::TradingCalendar>(store.calendar());
    execution::Account account;

    masking::AliasMap map(MaskLevel level, data::DayIndex day) const {
        return masking::AliasMap({store.tickers().begin(), store.tickers().end()}, cal, 9, level, day);
    }
};

}  // namespace

TEST(Tools, EveryToolStampsCutoffAndIsClean) {
    Fixture f;
    const data::DayIndex day = 300;
    for (MaskLevel level : masking::kAllLevels) {
        const auto m = f.map(level, day);
        ToolContext ctx{f.store, f.account, day, m};
        const std::string a = m.render_ticker(f.store.tickers()[0]), b = m.render_ticker(f.store.tickers()[1]);
        const std::vector<std::pair<std::string, Json>> calls{
            {"get_market_context", Json::object()},
            {"screen_candidates", Json{{"sort_by", "ret_5d"}, {"top_k", 5}}},
            {"get_stock_snapshot", Json{{"stock_id", a}, {"lookback", 5}}},
            {"compare_candidates", Json{{"stock_ids", Json::array({a, b})}}},
            {"portfolio_state", Json::object()},
            {"risk_check", Json{{"draft_orders", Json::array({Json{{"stock_id", a}, {"side", "BUY"}, {"target_weight", 0.1},
                                                                    {"confidence", 0.5}, {"reason", "testing the tool"}}})}}},
        };
        for (const auto& [name, args] : calls) {
            const auto r = call_tool(ctx, name, args);
            ASSERT_TRUE(r.ok) << name << " " << r.error_message;
            EXPECT_EQ(r.payload["as_of_date"], m.render_date(day));
            EXPECT_EQ(r.payload["data_cutoff"], m.render_date(day - 1));
            EXPECT_TRUE(masking::leak_scan(r.payload, m).empty()) << name << " " << r.payload.dump();
        }
    }
}

TEST(Tools, DateMaskedContextOmitsCalendarPosition) {
    Fixture f;
    for (MaskLevel level : masking::kAllLevels) {
        const auto m = f.map(level, 300);
        ToolContext ctx{f.store, f.account, 300, m};
        const auto r = call_tool(ctx, "get_market_context", Json::object());
        EXPECT_EQ(r.payload["calendar"].contains("observable_trading_days"), !masking::masks_dates(level));
    }
}

TEST(Tools, ScreenSortsDescendingAndRespectsTopK) {
    Fixture f;
    const auto m = f.map(MaskLevel::Blinded, 300);
    ToolContext ctx{f.store, f.account, 300, m};
    const auto r = call_tool(ctx, "screen_candidates", Json{{"sort_by", "vol_20d"}, {"top_k", 7}});
    ASSERT_TRUE(r.ok);
    const auto& c = r.payload["candidates"];
    ASSERT_EQ(c.size(), 7u);
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GE(c[i - 1]["vol_20d"].get<double>(), c[i]["vol_20d"].get<double>());
    EXPECT_EQ(c[0]["rank"], 1);
}

TEST(Tools, SnapshotBarsEndAtCutoff) {
    Fixture f;
    const auto m = f.map(MaskLevel::Bright, 300);
    ToolContext ctx{f.store, f.account, 300, m};
    const std::string t(f.store.tickers()[4]);
    const auto r = call_tool(ctx, "get_stock_snapshot", Json{{"stock_id", t}, {"lookback", 3}});
    ASSERT_TRUE(r.ok);
    const auto& bars = r.payload["bars"];
    ASSERT_EQ(bars.size(), 3u);
    EXPECT_EQ(bars.back()["date"], f.cal->at(299).iso());
    EXPECT_EQ(bars.back()["close"], f.store.bar(4, 299)->close);
}

TEST(Tools, StructuredErrors) {
    Fixture f;
    const auto m = f.map(MaskLevel::Blinded, 300);
    ToolContext ctx{f.store, f.account, 300, m};
    auto r = call_tool(ctx, "get_weather", Json::object());
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.error_code, "UNKNOWN_TOOL");
    r = call_tool(ctx, "get_stock_snapshot", Json{{"stock_id", "asset_9999"}});
    EXPECT_EQ(r.error_code, "INVALID_ARGUMENT");
    EXPECT_EQ(r.payload["error"]["path"], "$.stock_id");
    r = call_tool(ctx, "screen_candidates", Json{{"sort_by", "pe_ratio"}});
    EXPECT_EQ(r.error_code, "INVALID_ARGUMENT");
    r = call_tool(ctx, "screen_candidates", Json{{"top_k", 0}});
    EXPECT_EQ(r.error_code, "INVALID_ARGUMENT");
    r = call_tool(ctx, "get_market_context", Json{{"extra", 1}});
    EXPECT_EQ(r.error_code, "INVALID_ARGUMENT");
    const std::string a = m.alias_of(f.store.tickers()[0]);
    r = call_tool(ctx, "compare_candidates", Json{{"stock_ids", Json::array({a, a})}});
    EXPECT_EQ(r.error_code, "INVALID_ARGUMENT");
    EXPECT_TRUE(masking::leak_scan(r.payload, m).empty());
}

TEST(Tools, RiskCheckDoesNotMutateAccount) {
    Fixture f;
    const auto m = f.map(MaskLevel::Bright, 300);
    ToolContext ctx{f.store, f.account, 300, m};
    const std::string t(f.store.tickers()[2]);
    const auto r = call_tool(ctx, "risk_check", Json{{"draft_orders", Json::array({Json{{"stock_id", t}, {"side", "BUY"},
        {"target_weight", 0.2}, {"confidence", 0.5}, {"reason", "testing the tool"}}})}});
    ASSERT_TRUE(r.ok) << r.error_message;
    EXPECT_TRUE(r.payload["valid"].get<bool>());
    EXPECT_TRUE(r.payload["projected_weights"].contains(t));
    EXPECT_TRUE(f.account.positions.empty());
    EXPECT_EQ(f.account.cash, Money::from_cny(1'000'000.0));
}

TEST(Tools, ToolsIgnoreTheDecisionDayBar) {
    Fixture f;
    auto bars = f.store.all_bars();
    for (auto& b : bars)
        if (b.date == f.cal->at(300)) b.values = data::DailyBar{1, 1, 1, 1, 1, 1};
    const data::MarketStore altered(f.store.calendar(), std::move(bars));
    const auto m = f.map(MaskLevel::Blinded, 300);
    ToolContext a{f.store, f.account, 300, m}, b{altered, f.account, 300, m};
    for (const char* name : {"get_market_context", "screen_candidates", "portfolio_state"})
        EXPECT_EQ(call_tool(a, name, Json::object()).payload, call_tool(b, name, Json::object()).payload) << name;
}
