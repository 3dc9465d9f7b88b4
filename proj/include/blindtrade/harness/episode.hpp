#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blindtrade/core/json.hpp"
#include "blindtrade/data/market_store.hpp"
#include "blindtrade/execution/executor.hpp"
#include "blindtrade/harness/action.hpp"
#include "blindtrade/harness/config.hpp"
#include "blindtrade/harness/endpoint.hpp"
#include "blindtrade/masking/alias_map.hpp"

namespace blindtrade::harness {

/// One evaluation cell. Steps run on trading days [start, end]; each decides with data
/// through close[d - 1], fills at open[d], and marks at close[d].
struct EpisodeSpec {
    DecisionMode mode = DecisionMode::OpenResearch;
    masking::MaskLevel level = masking::MaskLevel::Blinded;
    data::DayIndex start = 1;
    data::DayIndex end = 1;
    std::uint64_t seed = 0;
    HarnessConfig config;
    std::string agent = "agent";
    std::string window = "window";
};

/// The episode's alias map, anchored at the window start. Deterministic in (store, spec).
std::shared_ptr<const masking::AliasMap> make_episode_map(const data::MarketStore& store, const EpisodeSpec& spec);

struct ToolCallRecord {
    std::string call_id;
    std::string name;
    Json args;
    bool ok = false;
    std::string error_code;
};

struct AttemptRecord {
    Json submitted;  // action object, raw string, or the offending message
    std::vector<Violation> violations;
};

struct StepRecord {
    int step = 0;
    data::DayIndex day = 0;
    std::string user_content;
    Json transcript = Json::array();  // {"dir": "to_agent" | "from_agent", "message": ...}
    std::vector<ToolCallRecord> tool_calls;
    std::vector<AttemptRecord> attempts;
    std::vector<std::string> protocol_violations;
    bool fallback = false;
    std::string fallback_reason;
    std::optional<ActionDocument> action;
    std::vector<execution::Order> orders;  // executed orders, real tickers
    execution::StepResult result;
    Json prev_execution;                   // masked summary shown in this step's prompt
    execution::NavPoint mark;

    bool parse_failure() const { return fallback; }
    bool abstained() const { return orders.empty(); }
};

/// Per-order calibration outcome over the open[d] -> open[d + 1] horizon.
struct OrderOutcome {
    int step = 0;
    data::DayIndex day = 0;
    std::string ticker;
    execution::Side side = execution::Side::Buy;
    double confidence = 0.0;
    std::optional<double> next_return;  // nullopt on the final step or without both opens
};

struct Episode {
    EpisodeSpec spec;
    std::shared_ptr<const masking::AliasMap> map;
    std::string system_prompt;
    std::vector<StepRecord> steps;
    std::vector<execution::NavPoint> nav;  // start - 1 .. end; the first point is the initial cash
    std::vector<double> benchmark_nav;     // equal-weight index scaled to initial cash, same days
    std::vector<OrderOutcome> outcomes;
};

/// Runs the research/submission loop for every step of the window. Agent failures
/// (malformed output, protocol misuse, timeouts) become violations and fallbacks; only
/// harness preconditions throw.
Episode run_episode(const data::MarketStore& store, const EpisodeSpec& spec, AgentEndpoint& agent);

/// Every message the harness sent to the agent, in order (system prompt excluded).
std::vector<Json> outbound_messages(const Episode& episode);

/// Writes config.json, alias_map.json, steps.jsonl, trades.jsonl, nav.csv, holdings.jsonl, orders.jsonl.
void write_episode(const Episode& episode, const std::filesystem::path& dir);

Json step_json(const StepRecord& step, const data::TradingCalendar& calendar);

}  // namespace blindtrade::harness
