#include "blindtrade/harness/agents.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "blindtrade/core/date.hpp"
#include "blindtrade/core/error.hpp"
#include "blindtrade/data/board.hpp"
#include "blindtrade/execution/executor.hpp"

namespace blindtrade::harness {

namespace {

Json order(const std::string& id, const char* side, double weight, double confidence, std::string reason) {
    return Json{{"stock_id", id},
                {"side", side},
                {"target_weight", weight},
                {"confidence", confidence},
                {"reason", std::move(reason)}};
}

Json action(Json orders, std::string overall) {
    return Json{{"orders", std::move(orders)}, {"overall_reason", std::move(overall)}};
}

struct Held {
    std::int64_t available = 0;
    double weight = 0.0;
};

std::map<std::string, Held> holdings(const Json& data) {
    std::map<std::string, Held> out;
    if (!data.contains("account")) return out;
    for (const auto& p : data["account"].value("positions", Json::array()))
        out[p["stock_id"].get<std::string>()] = {p.value("shares_available", std::int64_t{0}), p.value("weight", 0.0)};
    return out;
}

/// SELL held names outside `target` (when sellable), BUY new names at 1/k.
Json rebalance(const std::vector<std::string>& target, const std::map<std::string, Held>& held, std::size_t k,
               const std::function<double()>& confidence, const std::string& why_buy, const std::string& why_sell) {
    Json orders = Json::array();
    const std::set<std::string> keep(target.begin(), target.end());
    for (const auto& [id, h] : held)
        if (!keep.contains(id) && h.available > 0) orders.push_back(order(id, "SELL", 0.0, confidence(), why_sell));
    for (std::size_t r = 0; r < target.size(); ++r)
        if (!held.contains(target[r]))
            orders.push_back(order(target[r], "BUY", 1.0 / static_cast<double>(k), confidence(),
                                   why_buy + " (rank " + std::to_string(r + 1) + ")"));
    return orders;
}

}  // namespace

std::optional<Json> ScriptedAgent::research_call(const Json&) const { return std::nullopt; }

Json ScriptedAgent::submit() {
    return Json{{"type", "submit"}, {"action", decide(data_, research_ ? &*research_ : nullptr)}};
}

std::vector<Json> ScriptedAgent::on_message(const Json& m) {
    const std::string type = m.value("type", "");
    if (type == "episode_start") {
        mode_ = m.value("mode", "open_research");
        return {};
    }
    if (type == "user_message") {
        data_ = m.value("data", Json::object());
        research_.reset();
        if (mode_ != "open_research") return {};
        if (auto call = research_call(data_)) {
            (*call)["type"] = "tool_call";
            (*call)["call_id"] = "c" + std::to_string(++call_seq_);
            return {*call};
        }
        return {submit()};
    }
    if (type == "tool_result") {
        research_ = m.value("payload", Json::object());
        return {submit()};
    }
    if (type == "submission_demand") return {submit()};
    return {};
}

Json CashAgent::decide(const Json&, const Json*) {
    return action(Json::array(), "No identifiable edge today; holding cash and the current book.");
}

Json RandomAgent::decide(const Json& data, const Json*) {
    std::vector<std::string> pool;
    const bool fixed = mode_ == "fixed_candidate";
    if (fixed) {
        for (const auto& c : data.value("candidates", Json::array())) pool.push_back(c["stock_id"].get<std::string>());
    } else {
        for (const auto& id : data.value("universe", Json::array())) pool.push_back(id.get<std::string>());
    }
    const auto held = holdings(data);
    if (pool.empty() || k_ == 0) return action(Json::array(), "Nothing to choose from today; holding the current book.");
    rng_.shuffle(pool.begin(), pool.end());
    pool.resize(std::min(k_, pool.size()));
    std::sort(pool.begin(), pool.end());
    auto conf = [this] { return rng_.uniform(); };
    return action(rebalance(pool, held, k_, conf, "uniform random pick", "not picked this step"),
                  "Random baseline: equal-weight a fresh uniform draw of k names.");
}

Json BuyAndHoldAgent::decide(const Json& data, const Json*) {
    if (entered_ || !holdings(data).empty()) {
        entered_ = true;
        return action(Json::array(), "Buy-and-hold: keeping the initial book unchanged.");
    }
    std::vector<std::string> pool;
    const char* source = mode_ == "fixed_candidate" ? "candidates" : "universe";
    for (const auto& c : data.value(source, Json::array()))
        pool.push_back(c.is_object() ? c["stock_id"].get<std::string>() : c.get<std::string>());
    std::sort(pool.begin(), pool.end());
    if (k_ && pool.size() > k_) pool.resize(k_);
    if (pool.empty()) return action(Json::array(), "Nothing visible to buy yet; waiting with cash.");
    entered_ = true;
    const double w = 0.99 / static_cast<double>(pool.size());
    Json orders = Json::array();
    for (const auto& id : pool) orders.push_back(order(id, "BUY", w, 0.5, "initial equal-weight entry"));
    return action(orders, "Buy-and-hold: one equal-weight entry, then no further trading.");
}

std::optional<Json> MomentumTopKAgent::research_call(const Json& data) const {
    std::int64_t top_k = 100;
    if (data.contains("limits")) top_k = std::min<std::int64_t>(top_k, data["limits"].value("max_candidates_per_step", top_k));
    return Json{{"name", "screen_candidates"}, {"args", {{"sort_by", "ret_20d"}, {"top_k", top_k}}}};
}

Json MomentumTopKAgent::decide(const Json& data, const Json* research) {
    Json rows = Json::array();
    if (mode_ == "fixed_candidate")
        rows = data.value("candidates", Json::array());
    else if (research && research->contains("candidates"))
        rows = (*research)["candidates"];

    struct Row {
        std::string id;
        double ret, vol;
    };
    std::vector<Row> usable;
    for (const auto& r : rows)
        if (r["ret_20d"].is_number() && r["vol_20d"].is_number())
            usable.push_back({r["stock_id"].get<std::string>(), r["ret_20d"].get<double>(), r["vol_20d"].get<double>()});
    if (usable.empty() || k_ == 0)
        return action(Json::array(), "No momentum features available this step; holding the current book.");

    std::vector<double> vols;
    for (const auto& u : usable) vols.push_back(u.vol);
    std::sort(vols.begin(), vols.end());
    const std::size_t n = vols.size();
    const double median = n % 2 ? vols[n / 2] : 0.5 * (vols[n / 2 - 1] + vols[n / 2]);
    std::erase_if(usable, [&](const Row& u) { return u.vol > median; });
    std::stable_sort(usable.begin(), usable.end(), [](const Row& a, const Row& b) {
        return a.ret != b.ret ? a.ret > b.ret : a.id < b.id;
    });
    std::vector<std::string> target;
    for (std::size_t i = 0; i < usable.size() && i < k_; ++i) target.push_back(usable[i].id);

    const double c = confidence_;
    return action(rebalance(target, holdings(data), k_, [c] { return c; },
                            "20-day return leader with below-median volatility",
                            "left the momentum top-k or volatility filter"),
                  "Momentum top-k: hold the strongest 20-day names with below-median volatility, equal weight.");
}

ScoreTable load_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open score file " + path);
    ScoreTable out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (n == 1) {
            if (line != "date,ticker,score") throw DataError("expected header date,ticker,score", n);
            continue;
        }
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string d, t, s;
        if (!std::getline(ss, d, ',') || !std::getline(ss, t, ',') || !std::getline(ss, s)) throw DataError("expected 3 columns", n);
        try {
            const auto date = Date::parse_iso(d).iso();
            std::size_t used = 0;
            const double score = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument("score");
            out[date][data::normalize_ticker(t)] = score;
        } catch (const std::invalid_argument& e) {
            throw DataError(std::string("malformed row: ") + e.what(), n);
        } catch (const std::out_of_range&) {
            throw DataError("score out of range", n);
        }
    }
    return out;
}

Json ScoreFileAgent::decide(const Json& data, const Json*) {
    auto abstain = [](std::string why) { return action(Json::array(), std::move(why)); };
    const auto day = map_->resolve_date(data.value("date_label", ""), "$.date_label");
    const auto it = scores_.find(map_->calendar().at(day).iso());
    if (it == scores_.end()) return abstain("No scores for this day; holding the current book.");

    std::set<std::string> eligible;
    if (mode_ == "fixed_candidate") {
        for (const auto& c : data.value("candidates", Json::array())) eligible.insert(map_->resolve_ticker(c["stock_id"].get<std::string>()));
    } else {
        for (const auto& id : data.value("universe", Json::array())) eligible.insert(map_->resolve_ticker(id.get<std::string>()));
    }
    std::map<std::string, double> weights;
    for (const auto& [id, h] : holdings(data)) {
        const auto t = map_->resolve_ticker(id);
        weights[t] = h.weight;
        eligible.insert(t);
    }
    std::map<std::string, double> scores;
    for (const auto& t : eligible)
        if (const auto s = it->second.find(t); s != it->second.end()) scores[t] = s->second;
    if (scores.size() < k_) return abstain("Scores cover fewer names than the book size; holding the current book.");

    Json orders = Json::array();
    for (const auto& o : execution::score_portfolio_step(scores, weights, k_, threshold_))
        orders.push_back(order(map_->render_ticker(o.ticker), o.side == execution::Side::Buy ? "BUY" : "SELL",
                               *o.target_weight, o.confidence, o.reason));
    return action(std::move(orders), "Score-driven top-k book with cost-aware rebalancing threshold.");
}

std::unique_ptr<Responder> make_scripted_agent(const std::string& kind, const Json& params, std::uint64_t episode_seed,
                                               std::shared_ptr<const masking::AliasMap> map) {
    const Json p = params.is_object() ? params : Json::object();
    auto k = [&](std::size_t fallback) {
        const auto v = p.value("k", static_cast<std::int64_t>(fallback));
        if (v <= 0) throw std::invalid_argument("agent parameter k must be positive");
        return static_cast<std::size_t>(v);
    };
    if (kind == "cash") return std::make_unique<CashAgent>();
    if (kind == "random")
        return std::make_unique<RandomAgent>(
            p.contains("seed") ? p["seed"].get<std::uint64_t>() : derive_seed(episode_seed, "random-agent"), k(10));
    if (kind == "momentum_topk") return std::make_unique<MomentumTopKAgent>(k(5), p.value("confidence", 0.6));
    if (kind == "buy_and_hold") return std::make_unique<BuyAndHoldAgent>(p.contains("k") ? k(1) : 0);
    if (kind == "score_file") {
        if (!map) throw std::invalid_argument("score_file agent needs the episode alias map");
        if (!p.contains("path")) throw std::invalid_argument("score_file agent needs params.path");
        return std::make_unique<ScoreFileAgent>(load_scores(p["path"].get<std::string>()), std::move(map), k(20),
                                                p.value("threshold", 0.06));
    }
    throw std::invalid_argument("unknown scripted agent kind '" + kind + "'");
}

}  // namespace blindtrade::harness
