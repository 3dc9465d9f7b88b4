#include "blindtrade/harness/episode.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include "blindtrade/core/error.hpp"
#include "blindtrade/core/rng.hpp"
#include "blindtrade/harness/prompt.hpp"
#include "blindtrade/masking/mask.hpp"
#include "blindtrade/tools/tools.hpp"

namespace blindtrade::harness {

std::shared_ptr<const masking::AliasMap> make_episode_map(const data::MarketStore& store, const EpisodeSpec& spec) {
    // Non-owning: the map never outlives the store it was built over.
    std::shared_ptr<const data::TradingCalendar> cal(std::shared_ptr<void>{}, &store.calendar());
    std::vector<std::string> tickers(store.tickers().begin(), store.tickers().end());
    return std::make_shared<const masking::AliasMap>(std::move(tickers), cal, derive_seed(spec.seed, "alias-map"),
                                                     spec.level, spec.start);
}

namespace {

Json violations_json(const std::vector<Violation>& v) {
    Json out = Json::array();
    for (const auto& x : v)
        out.push_back({{"code", violation_code_name(x.code)}, {"path", x.path}, {"message", x.message}});
    return out;
}

Json codes_json(const std::vector<Violation>& v) {
    Json out = Json::array();
    for (const auto& x : v) {
        const std::string c(violation_code_name(x.code));
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

Episode run_episode(const data::MarketStore& store, const EpisodeSpec& spec, AgentEndpoint& agent) {
    const auto& cal = store.calendar();
    if (spec.start < 1 || spec.end < spec.start || !cal.contains(spec.end))
        throw PreconditionError("episode window must satisfy 1 <= start <= end < calendar size");

    Episode ep;
    ep.spec = spec;
    ep.map = make_episode_map(store, spec);
    ep.system_prompt = std::string(system_prompt(spec.mode));
    const auto& map = *ep.map;
    const auto& cfg = spec.config;
    const auto costs = cfg.cost_model();
    const auto limits = cfg.action_limits();
    const auto timeout = std::chrono::milliseconds(static_cast<long long>(cfg.llm.timeout_s * 1000.0));
    const std::size_t max_attempts = 1 + cfg.agent.schema_retries;
    const auto level = store.index_level();
    const double bench0 = level[spec.start - 1];

    execution::Account acct(Money::from_cny(cfg.execution.initial_cash));
    ep.nav.push_back({spec.start - 1, acct.cash, acct.cash, {}});
    ep.benchmark_nav.push_back(acct.cash.cny());

    Json* transcript = nullptr;
    auto send = [&](Json m) {
        if (transcript) transcript->push_back({{"dir", "to_agent"}, {"message", m}});
        agent.send(m);
    };

    Json tools_list = Json::array();
    if (spec.mode == DecisionMode::OpenResearch)
        for (auto t : tools::kToolNames) tools_list.push_back(t);
    send({{"type", "episode_start"},
          {"mode", mode_name(spec.mode)},
          {"system_prompt", ep.system_prompt},
          {"tools", tools_list},
          {"steps", spec.end - spec.start + 1},
          {"llm", cfg.to_json()["llm"]}});

    std::optional<masking::Node> prev;
    for (data::DayIndex d = spec.start; d <= spec.end; ++d) {
        StepRecord rec;
        rec.step = d - spec.start;
        rec.day = d;
        transcript = &rec.transcript;
        acct.unlock_all();

        tools::ToolContext ctx{store, acct, d, map, lower(cfg.execution.benchmark), costs, limits,
                               cfg.agent.max_candidates_per_step};
        StepView view;
        view.mode = spec.mode;
        view.step = rec.step;
        view.ctx = &ctx;
        if (spec.mode == DecisionMode::FixedCandidate)
            view.candidates = fixed_candidate_pool(ctx, 10, cfg.agent.max_candidates_per_step);
        view.prev_execution = prev;
        view.portfolio_ret_cum = ep.nav.back().nav.cny() / acct.initial_cash.cny() - 1.0;
        view.benchmark_ret_cum = level[d - 1] / bench0 - 1.0;
        view.benchmark_name = cfg.execution.benchmark;
        view.obs_window = cfg.agent.obs_window;
        const auto rendered = render_user_message(view);
        rec.user_content = rendered.content;
        rec.prev_execution = rendered.data["prev_execution"];

        std::set<std::string> pool, held;
        for (const auto& r : view.candidates) pool.insert(r.ticker);
        for (const auto& [t, p] : acct.positions) held.insert(t);
        ValidationContext vctx{&map, limits, spec.mode, &pool, &held};

        send({{"type", "user_message"}, {"step", rec.step}, {"content", rendered.content}, {"data", rendered.data}});

        std::size_t tool_calls = 0;
        bool demanded = false;
        auto demand = [&] {
            send({{"type", "submission_demand"}});
            demanded = true;
        };
        auto fallback = [&](std::string why) {
            rec.fallback = true;
            rec.fallback_reason = std::move(why);
        };
        // Records a failed submission attempt; true when the retry budget is spent.
        auto fail_attempt = [&](Json submitted, std::vector<Violation> v, Json extra = Json::object()) {
            Json msg{{"type", "violation"},
                     {"codes", codes_json(v)},
                     {"detail", cfg.agent.retry_with_feedback ? describe(v) : std::string()}};
            for (auto& [k, x] : extra.items()) msg[k] = x;
            rec.attempts.push_back({std::move(submitted), std::move(v)});
            send(msg);
            if (rec.attempts.size() >= max_attempts) {
                fallback("retries exhausted");
                return true;
            }
            demand();
            return false;
        };

        if (spec.mode != DecisionMode::OpenResearch) demand();
        for (;;) {
            Inbound in = agent.receive(timeout);
            if (in.kind == Inbound::Kind::Timeout || in.kind == Inbound::Kind::Closed) {
                rec.protocol_violations.push_back("TIMEOUT");
                fallback(in.kind == Inbound::Kind::Timeout ? "agent timed out" : "agent stream closed");
                break;
            }
            const Json msg = in.kind == Inbound::Kind::Message ? in.message : Json(in.raw);
            rec.transcript.push_back({{"dir", "from_agent"}, {"message", msg}});
            const std::string type = msg.is_object() ? msg.value("type", "") : "";

            if (type == "tool_call") {
                const Json call_id = msg.value("call_id", Json(""));
                ToolCallRecord tr{call_id.is_string() ? call_id.get<std::string>() : call_id.dump(),
                                  msg.value("name", Json("")).is_string() ? msg.value("name", std::string()) : "",
                                  msg.value("args", Json::object()), false, {}};
                if (demanded) {
                    const auto code = spec.mode == DecisionMode::OpenResearch ? ViolationCode::ToolAfterDemand
                                                                             : ViolationCode::ToolForbidden;
                    tr.error_code = violation_code_name(code);
                    rec.tool_calls.push_back(tr);
                    rec.protocol_violations.push_back(tr.error_code);
                    const std::string why = code == ViolationCode::ToolAfterDemand
                                                ? "tool calls are not accepted after the submission demand; submit now"
                                                : "tools are not available in this decision mode; submit a decision";
                    if (fail_attempt(msg, {{code, "$", why}}, {{"call_id", call_id}})) break;
                    continue;
                }
                if (++tool_calls > cfg.agent.max_tool_calls_per_step) {
                    tr.error_code = "BUDGET_EXHAUSTED";
                    rec.tool_calls.push_back(tr);
                    rec.protocol_violations.push_back(tr.error_code);
                    send({{"type", "tool_result"},
                          {"call_id", call_id},
                          {"ok", false},
                          {"payload",
                           {{"error",
                             {{"code", "BUDGET_EXHAUSTED"},
                              {"message", "the tool-call budget of " + std::to_string(cfg.agent.max_tool_calls_per_step) +
                                              " per step is spent; submit your decision now"}}}}}});
                    demand();
                    continue;
                }
                const auto res = tools::call_tool(ctx, tr.name, tr.args);
                tr.ok = res.ok;
                tr.error_code = res.error_code;
                rec.tool_calls.push_back(tr);
                send({{"type", "tool_result"}, {"call_id", call_id}, {"ok", res.ok}, {"payload", res.payload}});
                continue;
            }

            if (type == "submit") {
                ValidationResult vr;
                Json submitted;
                if (msg.contains("action") && msg["action"].is_string()) {
                    submitted = msg["action"];
                    vr = validate_action(std::string_view(msg["action"].get_ref<const std::string&>()), vctx);
                } else if (msg.contains("action")) {
                    submitted = msg["action"];
                    vr = validate_action(msg["action"], vctx);
                } else {
                    vr = std::vector<Violation>{{ViolationCode::ParseError, "$.action", "submit carries no action"}};
                }
                if (auto* doc = std::get_if<ActionDocument>(&vr)) {
                    rec.attempts.push_back({submitted, {}});
                    rec.orders = doc->orders;
                    rec.action = std::move(*doc);
                    break;
                }
                if (fail_attempt(submitted, std::get<std::vector<Violation>>(vr))) break;
                continue;
            }

            // Anything else: malformed line or an unknown message type.
            std::vector<Violation> v{{ViolationCode::UnknownMessage, "$",
                                      "expected a JSON object with type tool_call or submit"}};
            if (demanded) {
                if (fail_attempt(msg, v)) break;
                continue;
            }
            rec.protocol_violations.push_back("UNKNOWN_MESSAGE");
            send({{"type", "violation"}, {"codes", codes_json(v)}, {"detail", describe(v)}});
            if (++tool_calls > cfg.agent.max_tool_calls_per_step) demand();
        }

        rec.result = execution::step(acct, rec.orders, d, store, costs);
        execution::mark(acct, d, store);
        rec.mark = acct.nav_series.back();
        ep.nav.push_back(rec.mark);
        ep.benchmark_nav.push_back(acct.initial_cash.cny() * level[d] / bench0);

        for (const auto& o : rec.orders) {
            OrderOutcome out{rec.step, d, o.ticker, o.side, o.confidence, std::nullopt};
            const auto id = store.id_of(o.ticker);
            if (d < spec.end && id) {
                const auto* a = store.bar(*id, d);
                const auto* b = store.bar(*id, d + 1);
                if (a && b) out.next_return = b->open / a->open - 1.0;
            }
            ep.outcomes.push_back(std::move(out));
        }
        prev = execution_summary(rec.result);
        transcript = nullptr;
        ep.steps.push_back(std::move(rec));
    }
    agent.send({{"type", "episode_end"}});
    return ep;
}

std::vector<Json> outbound_messages(const Episode& episode) {
    std::vector<Json> out;
    for (const auto& s : episode.steps)
        for (const auto& t : s.transcript)
            if (t["dir"] == "to_agent") out.push_back(t["message"]);
    return out;
}

namespace {

Json order_json(const execution::Order& o) {
    Json j{{"ticker", o.ticker}, {"side", execution::side_name(o.side)}};
    j["target_weight"] = o.target_weight ? Json(*o.target_weight) : Json(nullptr);
    j["shares"] = o.shares ? Json(*o.shares) : Json(nullptr);
    j["confidence"] = o.confidence;
    j["reason"] = o.reason;
    return j;
}

Json holdings_json(const execution::NavPoint& p) {
    Json h = Json::array();
    for (const auto& x : p.holdings)
        h.push_back({{"ticker", x.ticker}, {"shares", x.shares}, {"price", x.price}, {"stale", x.stale}});
    return h;
}

std::string money(Money m) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", m.cents < 0 ? "-" : "", std::llabs(m.cents) / 100,
                  std::llabs(m.cents) % 100);
    return buf;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

}  // namespace

Json step_json(const StepRecord& s, const data::TradingCalendar& cal) {
    Json j;
    j["step"] = s.step;
    j["date"] = cal.at(s.day).iso();
    j["user_content"] = s.user_content;
    j["prev_execution"] = s.prev_execution;
    Json calls = Json::array();
    for (const auto& c : s.tool_calls)
        calls.push_back({{"call_id", c.call_id}, {"name", c.name}, {"args", c.args}, {"ok", c.ok}, {"error_code", c.error_code}});
    j["tool_calls"] = calls;
    std::size_t valid = 0;
    for (const auto& c : s.tool_calls) valid += c.ok;
    j["tool_calls_total"] = s.tool_calls.size();
    j["tool_calls_valid"] = valid;
    Json attempts = Json::array();
    for (const auto& a : s.attempts) attempts.push_back({{"submitted", a.submitted}, {"violations", violations_json(a.violations)}});
    j["attempts"] = attempts;
    j["protocol_violations"] = s.protocol_violations;
    j["outcome"] = s.fallback ? "fallback" : "action";
    j["fallback_reason"] = s.fallback_reason;
    j["parse_failure"] = s.parse_failure();
    j["abstained"] = s.abstained();
    j["overall_reason"] = s.action ? Json(s.action->overall_reason) : Json(nullptr);
    j["fences_stripped"] = s.action && s.action->fences_stripped;
    Json orders = Json::array();
    for (const auto& o : s.orders) orders.push_back(order_json(o));
    j["orders"] = orders;
    Json fills = Json::array();
    for (const auto& f : s.result.fills)
        fills.push_back({{"order_index", f.order_index}, {"ticker", f.ticker}, {"side", execution::side_name(f.side)},
                         {"shares", f.shares}, {"intended_shares", f.intended_shares}, {"price", f.price},
                         {"notional", money(f.notional)}, {"cost", money(f.cost)}});
    j["fills"] = fills;
    Json rej = Json::array();
    for (const auto& r : s.result.rejections)
        rej.push_back({{"order_index", r.order_index}, {"ticker", r.order.ticker}, {"side", execution::side_name(r.order.side)},
                       {"code", execution::reject_code_name(r.code)}, {"detail", r.detail}});
    j["rejections"] = rej;
    j["turnover"] = s.result.turnover;
    j["nav"] = money(s.mark.nav);
    j["cash"] = money(s.mark.cash);
    j["transcript"] = s.transcript;
    return j;
}

void write_episode(const Episode& ep, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto& cal = ep.map->calendar();

    Json config;
    config["spec"] = {{"agent", ep.spec.agent},
                      {"mode", mode_name(ep.spec.mode)},
                      {"mask_level", masking::level_name(ep.spec.level)},
                      {"window", ep.spec.window},
                      {"start", cal.at(ep.spec.start).iso()},
                      {"end", cal.at(ep.spec.end).iso()},
                      {"seed", ep.spec.seed}};
    config["harness"] = ep.spec.config.to_json();
    write_text(dir / "config.json", config.dump(2) + "\n");
    write_text(dir / "alias_map.json", ep.map->to_json().dump(2) + "\n");

    std::string steps, trades, orders;
    for (const auto& s : ep.steps) {
        steps += step_json(s, cal).dump() + "\n";
        const std::string date = cal.at(s.day).iso();
        for (const auto& f : s.result.fills) {
            Json t{{"step", s.step}, {"date", date}, {"order_index", f.order_index}, {"status", "FILLED"}};
            t["order"] = order_json(s.orders.at(f.order_index));
            t["fill"] = {{"shares", f.shares}, {"intended_shares", f.intended_shares}, {"price", f.price},
                         {"notional", money(f.notional)}, {"cost", money(f.cost)}};
            trades += t.dump() + "\n";
        }
        for (const auto& r : s.result.rejections) {
            Json t{{"step", s.step}, {"date", date}, {"order_index", r.order_index}, {"status", "REJECTED"}};
            t["order"] = order_json(r.order);
            t["rejection"] = {{"code", execution::reject_code_name(r.code)}, {"detail", r.detail}};
            trades += t.dump() + "\n";
        }
    }
    for (const auto& o : ep.outcomes) {
        Json j{{"step", o.step}, {"date", cal.at(o.day).iso()}, {"ticker", o.ticker},
               {"side", execution::side_name(o.side)}, {"confidence", o.confidence}};
        j["next_return"] = o.next_return ? Json(*o.next_return) : Json(nullptr);
        orders += j.dump() + "\n";
    }
    write_text(dir / "steps.jsonl", steps);
    write_text(dir / "trades.jsonl", trades);
    write_text(dir / "orders.jsonl", orders);

    std::string nav = "date,nav,cash,benchmark\n", holdings;
    char buf[64];
    for (std::size_t i = 0; i < ep.nav.size(); ++i) {
        const auto& p = ep.nav[i];
        std::snprintf(buf, sizeof buf, "%.17g", ep.benchmark_nav[i]);
        nav += cal.at(p.day).iso() + "," + money(p.nav) + "," + money(p.cash) + "," + buf + "\n";
        Json h{{"date", cal.at(p.day).iso()}, {"nav", money(p.nav)}, {"cash", money(p.cash)}};
        h["holdings"] = holdings_json(p);
        holdings += h.dump() + "\n";
    }
    write_text(dir / "nav.csv", nav);
    write_text(dir / "holdings.jsonl", holdings);
}

}  // namespace blindtrade::harness
