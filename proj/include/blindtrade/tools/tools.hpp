#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blindtrade/core/json.hpp"
#include "blindtrade/data/features.hpp"
#include "blindtrade/data/market_store.hpp"
#include "blindtrade/execution/account.hpp"
#include "blindtrade/execution/executor.hpp"
#include "blindtrade/harness/action.hpp"
#include "blindtrade/masking/alias_map.hpp"
#include "blindtrade/masking/payload.hpp"

namespace blindtrade::tools {

inline constexpr std::array<std::string_view, 6> kToolNames = {
    "get_market_context", "screen_candidates", "get_stock_snapshot",
    "compare_candidates", "portfolio_state",   "risk_check"};

bool is_tool(std::string_view name);

/// Everything a tool may read at decision time. Tools never mutate any of it.
struct ToolContext {
    const data::MarketStore& store;
    const execution::Account& account;
    data::DayIndex day;  // decision day: data ends at close[day - 1]
    const masking::AliasMap& map;
    std::string market = "csi300";
    execution::CostModel costs{};
    harness::ActionLimits limits{};
    std::size_t max_candidates = 100;
};

struct ToolResult {
    bool ok = false;
    Json payload;  // masked; carries as_of_date and data_cutoff either way
    std::string error_code;
    std::string error_message;
};

/// Dispatches a tool call whose arguments are in agent (masked) form.
/// Invalid arguments come back as a structured error result, never as an exception.
ToolResult call_tool(const ToolContext& ctx, std::string_view name, const Json& args);

// Typed payload builders, real identifiers in, masking left to the caller.
masking::Node market_context(const ToolContext& ctx);
masking::Node screen_candidates(const ToolContext& ctx, std::string_view sort_by, std::size_t top_k);
masking::Node stock_snapshot(const ToolContext& ctx, const std::string& ticker, std::size_t lookback);
masking::Node compare_candidates(const ToolContext& ctx, const std::vector<std::string>& tickers,
                                 const std::vector<std::string>& dims, std::size_t duplicates_removed = 0);
masking::Node portfolio_state(const ToolContext& ctx);
masking::Node risk_check(const ToolContext& ctx, const std::vector<execution::Order>& orders);

/// Names the agent may trade at the decision day, in render order (by the id the agent sees).
std::vector<std::string> tradable_universe(const ToolContext& ctx);

/// Feature rows for the tradable universe, sorted descending by `field` (nulls dropped),
/// ties broken by rendered id.
std::vector<data::FeatureRow> ranked_features(const ToolContext& ctx, std::string_view field);

/// Close-to-close move of the last bar before `day` hit the engine threshold.
struct LimitFlags {
    bool limit_up_hit = false;
    bool limit_down_hit = false;
};
LimitFlags last_bar_limit_flags(const data::MarketStore& store, data::TickerId id, data::DayIndex day);

/// Feature row fields as a payload object (stock_id first).
masking::Node feature_node(const data::FeatureRow& row);

}  // namespace blindtrade::tools
