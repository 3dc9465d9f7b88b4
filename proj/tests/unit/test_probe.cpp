#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "attackers.hpp"
#include "blindtrade/core/error.hpp"
#include "blindtrade/data/synth.hpp"
#include "blindtrade/masking/mask.hpp"
#include "blindtrade/probe/probe.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace blindtrade;
using namespace blindtrade::probe;

namespace {

const data::MarketStore& market() {
    static const auto store = data::synth_market({.seed = 30, .n_stocks = 120, .n_days = 320});
    return store;
}

const std::vector<Probe>& probes() {
    static const auto p = generate_probes(market(), 200, {}, 4);
    return p;
}

}  // namespace

TEST(Wilson, MatchesClosedForm) {
    for (auto [h, n] : {std::pair<std::size_t, std::size_t>{3, 200}, {100, 200}, {1, 7}, {50, 60}}) {
        const auto [lo, hi] = wilson_interval(h, n);
        const auto [olo, ohi] = bt_test::oracle::wilson(static_cast<double>(h), static_cast<double>(n));
        EXPECT_NEAR(lo, olo, 1e-12);
        EXPECT_NEAR(hi, ohi, 1e-12);
    }
}

TEST(Wilson, Edges) {
    const auto [lo, hi] = wilson_interval(0, 200);
    EXPECT_EQ(lo, 0.0);
    EXPECT_NEAR(hi, 0.0188, 5e-5);
    const auto [lo2, hi2] = wilson_interval(200, 200);
    EXPECT_EQ(hi2, 1.0);
    EXPECT_NEAR(lo2, 1.0 - 0.0188, 5e-5);
}

TEST(Probe, WindowsAreContiguousAndNearEqual) {
    const auto w = probe_windows(market(), {});
    ASSERT_EQ(w.size(), 5u);
    EXPECT_EQ(w.front().first, 21);
    EXPECT_EQ(w.back().second, 319);
    int lo = 1 << 30, hi = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) {
            EXPECT_EQ(w[i].first, w[i - 1].second + 1);
        }
        lo = std::min(lo, w[i].second - w[i].first + 1);
        hi = std::max(hi, w[i].second - w[i].first + 1);
    }
    EXPECT_LE(hi - lo, 1);
}

TEST(Probe, StrataAreBalanced) {
    std::map<std::pair<int, data::Board>, int> count;
    std::set<std::string> ids;
    std::set<std::pair<std::string, data::DayIndex>> pairs;
    const auto w = probe_windows(market(), {});
    for (const auto& p : probes()) {
        ++count[{p.gold.window, p.gold.board}];
        EXPECT_TRUE(ids.insert(p.id).second);
        EXPECT_TRUE(pairs.insert({p.gold.ticker, p.gold.day}).second);
        const auto& span = w.at(static_cast<std::size_t>(p.gold.window - 1));
        EXPECT_GE(p.gold.day, span.first);
        EXPECT_LE(p.gold.day, span.second);
        EXPECT_EQ(market().board(*market().id_of(p.gold.ticker)).board, p.gold.board);
    }
    ASSERT_EQ(count.size(), 20u);
    for (const auto& [k, c] : count) EXPECT_EQ(c, 10);
}

TEST(Probe, PayloadsAreBlindedAndClean) {
    for (const auto& p : probes()) {
        const auto map = probe_alias_map(market(), p.gold);
        EXPECT_EQ(map.level(), masking::MaskLevel::Blinded);
        EXPECT_TRUE(masking::leak_scan(p.payload, map).empty()) << p.id;
        const auto text = p.payload.dump();
        EXPECT_EQ(text.find(p.gold.ticker), std::string::npos);
        EXPECT_EQ(text.find(market().calendar().at(p.gold.day).iso()), std::string::npos);
        EXPECT_EQ(p.payload["get_stock_snapshot"]["bars"].size(), 20u);
    }
}

TEST(Probe, SameSeedSameProbes) {
    const auto again = generate_probes(market(), 200, {}, 4);
    ASSERT_EQ(again.size(), probes().size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        EXPECT_EQ(again[i].id, probes()[i].id);
        EXPECT_EQ(again[i].payload, probes()[i].payload);
        EXPECT_EQ(again[i].gold.ticker, probes()[i].gold.ticker);
    }
    const auto other = generate_probes(market(), 200, {}, 5);
    int same = 0;
    for (std::size_t i = 0; i < other.size(); ++i) same += other[i].gold.ticker == probes()[i].gold.ticker;
    EXPECT_LT(same, 50);
}

TEST(Probe, ThinStratumThrows) {
    const auto small = data::synth_market({.seed = 2, .n_stocks = 4, .n_days = 300});
    EXPECT_THROW(generate_probes(small, 20000, {}, 1), PreconditionError);
}

TEST(Probe, CheaterScoresPerfectly) {
    std::map<std::string, Gold> gold;
    std::vector<Answer> answers;
    for (const auto& p : probes()) {
        gold[p.id] = p.gold;
        answers.push_back(bt_test::cheating_answer(p, market()));
    }
    const auto s = score_answers(gold, answers, market().calendar());
    EXPECT_EQ(s.tk1.rate(), 1.0);
    EXPECT_EQ(s.board.rate(), 1.0);
    EXPECT_EQ(s.date7.rate(), 1.0);
    EXPECT_EQ(s.joint.rate(), 1.0);
}

TEST(Probe, ScoreAnswerDistancesAndNormalization) {
    const auto& p = probes()[0];
    const auto& cal = market().calendar();
    Answer a{p.id, {"garbage", p.gold.ticker.substr(2)}, cal.at(p.gold.day - 8), "main"};
    a.board_guess = std::string(data::board_name(p.gold.board));
    for (auto& c : a.board_guess) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto o = score_answer(a, p.gold, cal);
    EXPECT_FALSE(o.tk1);
    EXPECT_TRUE(o.tk5);
    EXPECT_TRUE(o.board);
    EXPECT_EQ(o.date_distance, 8);
    EXPECT_THROW(score_answers({}, {a}, cal), PreconditionError);
}

TEST(Probe, GoldAndAnswersRoundTrip) {
    bt_test::TempDir tmp("probe");
    write_probes(probes(), market().calendar(), tmp.path());
    const auto gold = load_gold(tmp / "gold.json", market().calendar());
    ASSERT_EQ(gold.size(), 200u);
    EXPECT_EQ(gold.at(probes()[7].id).ticker, probes()[7].gold.ticker);
    EXPECT_EQ(gold.at(probes()[7].id).map_seed, probes()[7].gold.map_seed);
    EXPECT_TRUE(std::filesystem::exists(tmp / "probes" / (probes()[7].id + ".json")));

    const auto a = bt_test::cheating_answer(probes()[3], market());
    std::stringstream ss;
    ss << answer_json(a).dump() << "\nnot json\n{\"probe_id\": 3}\n";
    const auto parsed = parse_answers(ss);
    ASSERT_EQ(parsed.answers.size(), 1u);
    EXPECT_EQ(parsed.rejected, 2u);
    EXPECT_EQ(parsed.answers[0].ticker_top5, a.ticker_top5);
}

TEST(Probe, UniformBaselineNearChance) {
    std::map<std::string, Gold> gold;
    for (const auto& p : probes()) gold[p.id] = p.gold;
    const auto s = random_baseline(market(), gold, {}, 20, 11);
    EXPECT_EQ(s.tk1.n, 4000u);
    EXPECT_LE(s.tk1.lo, 1.0 / 120);
    EXPECT_GE(s.tk1.hi, 1.0 / 120);
    EXPECT_LE(s.board.lo, 0.25);
    EXPECT_GE(s.board.hi, 0.25);
    EXPECT_LE(s.tk5.lo, 5.0 / 120);
    EXPECT_GE(s.tk5.hi, 5.0 / 120);
}
