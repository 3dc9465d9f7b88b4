#include <gtest/gtest.h>

#include <fstream>

#include "blindtrade/core/error.hpp"
#include "blindtrade/data/board.hpp"
#include "blindtrade/data/features.hpp"
#include "blindtrade/data/market_store.hpp"
#include "blindtrade/data/style_factors.hpp"
#include "blindtrade/data/synth.hpp"
#include "fixtures.hpp"

using namespace blindtrade;
using namespace blindtrade::data;
using bt_test::StoreBuilder;
using bt_test::TempDir;

TEST(Board, ThresholdsByPrefix) {
    EXPECT_EQ(classify_board("SH600519").limit_pct, 0.095);
    EXPECT_EQ(classify_board("SZ000001").limit_pct, 0.095);
    EXPECT_EQ(classify_board("SZ300750").limit_pct, 0.195);
    EXPECT_EQ(classify_board("SH688981").limit_pct, 0.195);
    EXPECT_EQ(classify_board("BJ830799").limit_pct, 0.295);
    EXPECT_EQ(classify_board("BJ430047").limit_pct, 0.295);
    EXPECT_EQ(classify_board("SH688981").board, Board::Star);
    EXPECT_THROW(classify_board("SH900901"), std::invalid_argument);
}

TEST(Board, NormalizeTicker) {
    EXPECT_EQ(normalize_ticker(" sh600519 "), "SH600519");
    EXPECT_EQ(normalize_ticker("600519"), "SH600519");
    EXPECT_EQ(normalize_ticker("300750"), "SZ300750");
    EXPECT_EQ(normalize_ticker("830799"), "BJ830799");
    EXPECT_THROW(normalize_ticker("ABC"), std::invalid_argument);
}

TEST(Calendar, LookupsAndOrdering) {
    TradingCalendar cal(bt_test::weekdays(10));
    EXPECT_EQ(cal.size(), 10u);
    EXPECT_EQ(cal.at(0).iso(), "2023-01-02");
    EXPECT_EQ(cal.at(5).iso(), "2023-01-09");
    EXPECT_EQ(*cal.index_of(Date(2023, 1, 9)), 5);
    EXPECT_FALSE(cal.index_of(Date(2023, 1, 7)).has_value());
    EXPECT_EQ(*cal.on_or_after(Date(2023, 1, 7)), 5);
    EXPECT_EQ(*cal.on_or_before(Date(2023, 1, 7)), 4);
    EXPECT_THROW(TradingCalendar({Date(2023, 1, 3), Date(2023, 1, 2)}), DataError);
}

TEST(Ingest, RoundTripsThroughCsv) {
    TempDir tmp("ingest");
    const auto store = synth_market({.seed = 4, .n_stocks = 8, .n_days = 300});
    write_csv(store, (tmp / "bars.csv").string());
    const auto again = ingest_csv((tmp / "bars.csv").string());
    ASSERT_EQ(again.ticker_count(), store.ticker_count());
    ASSERT_EQ(again.calendar(), store.calendar());
    for (TickerId i = 0; i < store.ticker_count(); ++i)
        for (DayIndex d = 0; d < static_cast<DayIndex>(store.calendar().size()); ++d) {
            const auto* a = store.bar(i, d);
            const auto* b = again.bar(i, d);
            ASSERT_EQ(a == nullptr, b == nullptr);
            if (a) {
                EXPECT_EQ(*a, *b);
            }
        }
}

namespace {

std::size_t failing_line(const std::string& body) {
    TempDir tmp("bad");
    {
        std::ofstream f(tmp / "bad.csv");
        f << "ticker,date,open,high,low,close,volume,amount\n" << body;
    }
    try {
        ingest_csv((tmp / "bad.csv").string());
    } catch (const DataError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST(Ingest, ReportsTheOffendingLine) {
    const std::string good = "SH600000,2023-01-02,10,10.5,9.8,10.2,1000,10200\n";
    EXPECT_EQ(failing_line(good + "SH600000,2023-01-03,10,9.0,9.8,10.2,1000,10200\n"), 3u);  // high < low
    EXPECT_EQ(failing_line(good + good), 3u);                                               // duplicate
    EXPECT_EQ(failing_line(good + "SH600000,2023-13-03,10,10.5,9.8,10.2,1000,10200\n"), 3u);
    EXPECT_EQ(failing_line(good + "SH600000,2023-01-03,10,10.5\n"), 3u);
    EXPECT_EQ(failing_line(good + "SH600000,2023-01-03,-1,10.5,9.8,10.2,1000,10200\n"), 3u);
}

TEST(Store, UniverseAndReturns) {
    StoreBuilder b(6);
    b.flat("SH600000", 10.0).flat("SZ000001", 20.0);
    b.bar("SH600000", 3, 10, 11, 10, 11);
    b.erase("SZ000001", 2);
    const auto s = b.build();
    const auto a = *s.id_of("SH600000"), c = *s.id_of("SZ000001");
    EXPECT_NEAR(*s.close_return(a, 3), 0.1, 1e-15);
    EXPECT_FALSE(s.close_return(c, 3).has_value());
    EXPECT_FALSE(s.close_return(c, 2).has_value());
    // Tradable needs a bar on the previous day; investable on both.
    auto has = [](const std::vector<TickerId>& v, TickerId id) { return std::find(v.begin(), v.end(), id) != v.end(); };
    EXPECT_TRUE(has(s.tradable(2), c));
    EXPECT_FALSE(has(s.investable(2), c));
    EXPECT_FALSE(has(s.tradable(3), c));
    EXPECT_EQ(*s.last_bar_before(c, 4), 3);
    EXPECT_EQ(*s.last_bar_before(c, 3), 1);
    EXPECT_EQ(s.bars_before(c, 4), 3u);
    // Equal-weight index: day 3 has returns {+10%} for a; c has no bar at day 2.
    EXPECT_NEAR(s.index_level()[3] / s.index_level()[2] - 1.0, 0.1, 1e-15);
}

TEST(Features, HandComputedValues) {
    StoreBuilder b(30);
    std::vector<double> closes;
    for (int d = 0; d < 30; ++d) {
        const double c = 10.0 + 0.1 * d + (d % 3 == 0 ? 0.05 : 0.0);
        closes.push_back(c);
        b.bar("SH600000", d, c, c, c, c);
    }
    const auto s = b.build();
    const auto row = feature_row(s, 0, 25);
    EXPECT_DOUBLE_EQ(*row.prev_close, closes[24]);
    EXPECT_DOUBLE_EQ(*row.ret_1d, closes[24] / closes[23] - 1.0);
    EXPECT_DOUBLE_EQ(*row.ret_5d, closes[24] / closes[19] - 1.0);
    EXPECT_DOUBLE_EQ(*row.ret_20d, closes[24] / closes[4] - 1.0);
    std::vector<double> r;
    for (int d = 5; d <= 24; ++d) r.push_back(closes[d] / closes[d - 1] - 1.0);
    double m = 0;
    for (double x : r) m += x;
    m /= 20;
    double ss = 0;
    for (double x : r) ss += (x - m) * (x - m);
    EXPECT_NEAR(*row.vol_20d, std::sqrt(ss / 19), 1e-15);
    EXPECT_FALSE(row.partial);
    EXPECT_TRUE(feature_row(s, 0, 10).partial);
    EXPECT_FALSE(feature_row(s, 0, 10).ret_20d.has_value());
}

TEST(Features, PointInTime) {
    // Rewriting bars on or after the as-of day must not change anything.
    auto store_with = [](double late) {
        StoreBuilder b(40);
        for (int d = 0; d < 40; ++d) {
            const double c = d >= 30 ? late : 10.0 + 0.2 * std::sin(d);
            b.bar("SH600000", d, c, c, c, c);
        }
        return b.build();
    };
    const auto a = store_with(50.0), c = store_with(5.0);
    const auto fa = feature_row(a, 0, 30), fc = feature_row(c, 0, 30);
    EXPECT_EQ(fa.ret_1d, fc.ret_1d);
    EXPECT_EQ(fa.ret_20d, fc.ret_20d);
    EXPECT_EQ(fa.vol_20d, fc.vol_20d);
}

TEST(StyleFactors, PointInTimeAndHistoryRequirements) {
    const auto s = synth_market({.seed = 11, .n_stocks = 6, .n_days = 320});
    const auto r = style_row(s, 0, 300);
    for (std::size_t k = 0; k < kStyleFactorCount; ++k) EXPECT_TRUE(r.x[k].has_value()) << kStyleFactorNames[k];
    const auto early = style_row(s, 0, 100);
    EXPECT_FALSE(early[StyleFactor::Mom12_1].has_value());
    EXPECT_FALSE(early[StyleFactor::High52w].has_value());
    EXPECT_TRUE(early[StyleFactor::Rv60].has_value());

    // Truncating the store at the as-of day leaves the row unchanged.
    std::vector<Bar> bars;
    for (const auto& b : s.all_bars())
        if (b.date < s.calendar().at(300)) bars.push_back(b);
    const MarketStore cut(TradingCalendar(std::vector<Date>(s.calendar().days().begin(), s.calendar().days().begin() + 301)), bars);
    const auto r2 = style_row(cut, 0, 300);
    for (std::size_t k = 0; k < kStyleFactorCount; ++k) EXPECT_EQ(r.x[k], r2.x[k]) << kStyleFactorNames[k];

    EXPECT_EQ(parse_factor("CV_VOL"), StyleFactor::CvVol);
    EXPECT_FALSE(parse_factor("SIZE").has_value());
}

TEST(Synth, DeterministicAndWithinLimits) {
    const SynthParams p{.seed = 9, .n_stocks = 12, .n_days = 300};
    const auto a = synth_market(p), b = synth_market(p);
    ASSERT_EQ(a.all_bars().size(), b.all_bars().size());
    const auto ba = a.all_bars(), bb = b.all_bars();
    for (std::size_t i = 0; i < ba.size(); ++i) {
        ASSERT_EQ(ba[i].ticker, bb[i].ticker);
        ASSERT_EQ(ba[i].values, bb[i].values);
    }
    std::set<Board> boards;
    for (TickerId id = 0; id < a.ticker_count(); ++id) {
        boards.insert(a.board(id).board);
        const double official = a.board(id).limit_pct + 0.005;
        for (DayIndex d = 1; d < 300; ++d) {
            const auto* bar = a.bar(id, d);
            const auto* prev = a.bar(id, d - 1);
            if (!bar || !prev) continue;
            EXPECT_TRUE(check_bar(*bar).empty());
            EXPECT_LE(bar->high, prev->close * (1 + official) + 0.011);
            EXPECT_GE(bar->low, prev->close * (1 - official) - 0.011);
        }
    }
    EXPECT_EQ(boards.size(), 4u);
    const auto c = synth_market({.seed = 10, .n_stocks = 12, .n_days = 300});
    EXPECT_NE(c.all_bars()[5].values, ba[5].values);
    EXPECT_THROW(synth_market({.seed = 1, .n_stocks = 1, .n_days = 300}), PreconditionError);
}
