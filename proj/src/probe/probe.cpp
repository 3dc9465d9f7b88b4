#include "blindtrade/probe/probe.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>

#include "blindtrade/core/error.hpp"
#include "blindtrade/execution/account.hpp"
#include "blindtrade/masking/mask.hpp"
#include "blindtrade/tools/tools.hpp"

namespace blindtrade::probe {

using data::DayIndex;

namespace {

std::shared_ptr<const data::TradingCalendar> borrowed(const data::MarketStore& store) {
    return std::shared_ptr<const data::TradingCalendar>(std::shared_ptr<void>{}, &store.calendar());
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

Json probe_payload(const data::MarketStore& store, const std::string& id, const Gold& gold) {
    const auto map = probe_alias_map(store, gold);
    const execution::Account empty;
    tools::ToolContext ctx{store, empty, gold.day, map};
    auto call = [&](std::string_view name, const Json& args) {
        const auto r = tools::call_tool(ctx, name, args);
        if (!r.ok) throw PreconditionError("probe " + id + ": " + std::string(name) + " failed: " + r.error_message);
        return r.payload;
    };
    Json p = Json::object();
    p["probe_id"] = id;
    p["get_market_context"] = call("get_market_context", Json::object());
    p["screen_candidates"] = call("screen_candidates", Json{{"sort_by", "ret_20d"}, {"top_k", 15}});
    p["get_stock_snapshot"] =
        call("get_stock_snapshot", Json{{"stock_id", map.render_ticker(gold.ticker)}, {"lookback", 20}});
    return p;
}

}  // namespace

std::vector<std::pair<DayIndex, DayIndex>> probe_windows(const data::MarketStore& store, const StrataSpec& spec) {
    const DayIndex first = spec.min_history;
    const DayIndex last = static_cast<DayIndex>(store.calendar().size()) - 1;
    const int span = last - first + 1;
    if (spec.windows < 1 || span < spec.windows) throw PreconditionError("calendar too short for the probe windows");
    std::vector<std::pair<DayIndex, DayIndex>> out;
    for (int w = 0; w < spec.windows; ++w)
        out.emplace_back(first + span * w / spec.windows, first + span * (w + 1) / spec.windows - 1);
    return out;
}

masking::AliasMap probe_alias_map(const data::MarketStore& store, const Gold& gold) {
    std::vector<std::string> tickers(store.tickers().begin(), store.tickers().end());
    return masking::AliasMap(std::move(tickers), borrowed(store), gold.map_seed, masking::MaskLevel::Blinded, gold.day);
}

std::vector<Probe> generate_probes(const data::MarketStore& store, int n, const StrataSpec& spec, std::uint64_t seed) {
    if (n < 1) throw PreconditionError("probe count must be positive");
    const auto windows = probe_windows(store, spec);
    const int boards = static_cast<int>(std::size(data::kAllBoards));
    const int strata = static_cast<int>(windows.size()) * boards;
    std::vector<Gold> picked;
    for (int s = 0; s < strata; ++s) {
        const int w = s / boards;
        const auto board = data::kAllBoards[s % boards];
        const int want = n / strata + (s < n % strata ? 1 : 0);
        if (!want) continue;
        std::vector<std::pair<data::TickerId, DayIndex>> pool;
        for (DayIndex d = windows[w].first; d <= windows[w].second; ++d)
            for (auto id : store.tradable(d))
                if (store.board(id).board == board &&
                    store.bars_before(id, d) >= static_cast<std::size_t>(spec.min_history))
                    pool.emplace_back(id, d);
        if (pool.size() < static_cast<std::size_t>(want))
            throw PreconditionError("probe stratum (window " + std::to_string(w + 1) + ", board " +
                                    std::string(data::board_name(board)) + ") has " + std::to_string(pool.size()) +
                                    " eligible pairs, needs " + std::to_string(want));
        Rng rng(derive_seed(seed, "probe-stratum", static_cast<std::uint64_t>(s)));
        rng.shuffle(pool.begin(), pool.end());
        for (int i = 0; i < want; ++i) picked.push_back({store.ticker(pool[i].first), pool[i].second, board, w + 1, 0});
    }
    // Ids carry no stratum order.
    Rng order(derive_seed(seed, "probe-order"));
    order.shuffle(picked.begin(), picked.end());
    std::vector<Probe> out;
    for (std::size_t i = 0; i < picked.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "probe_%04zu", i + 1);
        Probe p{buf, {}, picked[i]};
        p.gold.map_seed = derive_seed(seed, "probe-map", i + 1);
        p.payload = probe_payload(store, p.id, p.gold);
        out.push_back(std::move(p));
    }
    return out;
}

void write_probes(const std::vector<Probe>& probes, const data::TradingCalendar& calendar,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "probes");
    Json gold = Json::object();
    for (const auto& p : probes) {
        std::ofstream f(dir / "probes" / (p.id + ".json"));
        f << p.payload.dump(2) << "\n";
        if (!f) throw DataError("cannot write probe " + p.id);
        gold[p.id] = {{"ticker", p.gold.ticker},
                      {"date", calendar.at(p.gold.day).iso()},
                      {"board", data::board_name(p.gold.board)},
                      {"window", p.gold.window},
                      {"map_seed", p.gold.map_seed}};
    }
    std::ofstream g(dir / "gold.json");
    g << gold.dump(2) << "\n";
    if (!g) throw DataError("cannot write gold.json");
}

std::map<std::string, Gold> load_gold(const std::filesystem::path& gold_json, const data::TradingCalendar& calendar) {
    std::ifstream in(gold_json);
    if (!in) throw DataError("cannot open " + gold_json.string());
    std::map<std::string, Gold> out;
    try {
        const auto j = Json::parse(in);
        for (const auto& [id, g] : j.items()) {
            const auto day = calendar.index_of(Date::parse_iso(g.at("date").get<std::string>()));
            if (!day) throw DataError("gold date for " + id + " is not a trading day");
            out[id] = Gold{g.at("ticker").get<std::string>(), *day, data::parse_board(g.at("board").get<std::string>()),
                           g.at("window").get<int>(), g.at("map_seed").get<std::uint64_t>()};
        }
    } catch (const Json::exception& e) {
        throw DataError(std::string("gold.json: ") + e.what());
    }
    return out;
}

AnswerFile parse_answers(std::istream& in) {
    AnswerFile out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = Json::parse(line);
            Answer a;
            a.probe_id = j.at("probe_id").get<std::string>();
            a.ticker_top5 = j.at("ticker_top5").get<std::vector<std::string>>();
            if (a.ticker_top5.size() > 5) throw std::invalid_argument("more than five tickers");
            a.date_guess = Date::parse_iso(j.at("date_guess").get<std::string>());
            a.board_guess = j.at("board_guess").get<std::string>();
            out.answers.push_back(std::move(a));
        } catch (const std::exception&) {
            ++out.rejected;
        }
    }
    return out;
}

Json answer_json(const Answer& a) {
    return Json{{"probe_id", a.probe_id},
                {"ticker_top5", a.ticker_top5},
                {"date_guess", a.date_guess.iso()},
                {"board_guess", a.board_guess}};
}

std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n, double z) {
    if (!n) return {0.0, 1.0};
    const double nn = static_cast<double>(n), p = static_cast<double>(hits) / nn, z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2 * nn)) / denom;
    const double half = z / denom * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
    return {hits == 0 ? 0.0 : std::max(0.0, center - half), hits == n ? 1.0 : std::min(1.0, center + half)};
}

Outcome score_answer(const Answer& a, const Gold& gold, const data::TradingCalendar& calendar) {
    Outcome o;
    for (std::size_t i = 0; i < a.ticker_top5.size(); ++i) {
        std::string t;
        try {
            t = data::normalize_ticker(a.ticker_top5[i]);
        } catch (const std::invalid_argument&) {
            continue;
        }
        if (t == gold.ticker) {
            o.tk5 = true;
            if (i == 0) o.tk1 = true;
        }
    }
    o.board = lower(a.board_guess) == lower(std::string(data::board_name(gold.board)));
    // A non-trading guess counts from the next trading day.
    const auto pos = calendar.on_or_after(a.date_guess);
    const int g = pos ? *pos : static_cast<int>(calendar.size());
    o.date_distance = std::abs(g - gold.day);
    return o;
}

ProbeScore score_outcomes(const std::vector<Outcome>& outcomes) {
    ProbeScore s;
    auto add = [](Rate& r, bool hit) {
        ++r.n;
        r.hits += hit;
    };
    for (const auto& o : outcomes) {
        add(s.tk1, o.tk1);
        add(s.tk5, o.tk5);
        add(s.board, o.board);
        add(s.date7, o.date_distance <= 7);
        add(s.date30, o.date_distance <= 30);
        add(s.date90, o.date_distance <= 90);
        add(s.joint, o.tk5 && o.date_distance <= 7);
    }
    for (Rate* r : {&s.tk1, &s.tk5, &s.board, &s.date7, &s.date30, &s.date90, &s.joint})
        std::tie(r->lo, r->hi) = wilson_interval(r->hits, r->n);
    s.n_responses = outcomes.size();
    return s;
}

ProbeScore score_answers(const std::map<std::string, Gold>& gold, const std::vector<Answer>& answers,
                         const data::TradingCalendar& calendar) {
    std::vector<Outcome> outcomes;
    for (const auto& a : answers) {
        const auto it = gold.find(a.probe_id);
        if (it == gold.end()) throw PreconditionError("answer for unknown probe id '" + a.probe_id + "'");
        outcomes.push_back(score_answer(a, it->second, calendar));
    }
    return score_outcomes(outcomes);
}

Json ProbeScore::to_json() const {
    auto r = [](const Rate& x) { return Json{{"rate", x.rate()}, {"ci95", {x.lo, x.hi}}, {"hits", x.hits}, {"n", x.n}}; };
    return Json{{"n_responses", n_responses}, {"rejected", rejected},  {"tk1", r(tk1)},
                {"tk5", r(tk5)},              {"board_acc", r(board)}, {"date_within_7", r(date7)},
                {"date_within_30", r(date30)}, {"date_within_90", r(date90)}, {"joint_success", r(joint)}};
}

Answer uniform_answer(const std::string& probe_id, const data::MarketStore& store, const StrataSpec& spec, Rng& rng) {
    Answer a;
    a.probe_id = probe_id;
    const auto n = store.ticker_count();
    std::vector<std::size_t> picks;
    while (picks.size() < std::min<std::size_t>(5, n)) {
        const auto i = rng.below(n);
        if (std::find(picks.begin(), picks.end(), i) == picks.end()) picks.push_back(i);
    }
    for (auto i : picks) a.ticker_top5.push_back(store.ticker(i));
    const auto windows = probe_windows(store, spec);
    const DayIndex first = windows.front().first, last = windows.back().second;
    a.date_guess = store.calendar().at(first + static_cast<DayIndex>(rng.below(static_cast<std::uint64_t>(last - first + 1))));
    a.board_guess = std::string(data::board_name(data::kAllBoards[rng.below(std::size(data::kAllBoards))]));
    return a;
}

ProbeScore random_baseline(const data::MarketStore& store, const std::map<std::string, Gold>& gold,
                           const StrataSpec& spec, int n_trials, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "probe-baseline"));
    std::vector<Outcome> outcomes;
    for (int t = 0; t < n_trials; ++t)
        for (const auto& [id, g] : gold) outcomes.push_back(score_answer(uniform_answer(id, store, spec, rng), g, store.calendar()));
    return score_outcomes(outcomes);
}

}  // namespace blindtrade::probe
