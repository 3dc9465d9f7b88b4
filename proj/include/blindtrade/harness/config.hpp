#pragma once

#include <string>
#include <vector>

#include "blindtrade/core/json.hpp"
#include "blindtrade/execution/executor.hpp"
#include "blindtrade/harness/action.hpp"

namespace blindtrade::harness {

struct ExecutionConfig {
    std::string benchmark = "CSI300";
    double initial_cash = 1'000'000.0;
    std::int64_t buy_cost_bps = 5;
    std::int64_t sell_cost_bps = 15;
    double min_cost = 5.0;
    std::string deal_price = "next_open";
    bool t_plus_1 = true;
    bool long_only = true;
};

struct AgentConfig {
    std::size_t max_candidates_per_step = 100;
    std::size_t max_tool_calls_per_step = 99;
    std::size_t max_positions_held = 300;
    double max_single_weight = 1.0;
    std::size_t schema_retries = 2;
    bool retry_with_feedback = true;
    std::size_t min_reason_length = 10;
    std::string fallback_action = "hold";
    std::size_t min_overall_reason_length = 20;
    bool lenient_fences = false;
    std::size_t obs_window = 20;
};

/// Forwarded to out-of-process adapters; the harness itself only uses timeout_s.
struct LlmConfig {
    double temperature = 0.0;
    std::size_t max_tokens = 32768;
    double timeout_s = 600.0;
    double inter_call_gap_s = 3.0;
};

struct HarnessConfig {
    ExecutionConfig execution;
    AgentConfig agent;
    LlmConfig llm;

    execution::CostModel cost_model() const;
    ActionLimits action_limits() const;

    Json to_json() const;
    /// Overlays `j` on the defaults. Unknown keys, wrong types, and unsupported
    /// settings (short selling, same-day deals, no T+1) throw std::invalid_argument.
    static HarnessConfig from_json(const Json& j);
    static HarnessConfig load(const std::string& path);
};

struct ConfigKeyDoc {
    std::string key;           // "group.name"
    std::string default_value;
    std::string description;
};

/// Every config key with its default, for --help output and the formats doc.
std::vector<ConfigKeyDoc> config_keys();

}  // namespace blindtrade::harness
