#include "blindtrade/harness/config.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

namespace blindtrade::harness {

execution::CostModel HarnessConfig::cost_model() const {
    execution::CostModel c;
    c.buy_bps = execution.buy_cost_bps;
    c.sell_bps = execution.sell_cost_bps;
    c.min_cost = Money::from_cny(execution.min_cost);
    return c;
}

ActionLimits HarnessConfig::action_limits() const {
    ActionLimits l;
    l.min_reason_length = agent.min_reason_length;
    l.min_overall_reason_length = agent.min_overall_reason_length;
    l.max_single_weight = agent.max_single_weight;
    l.max_positions_held = agent.max_positions_held;
    l.lenient_fences = agent.lenient_fences;
    return l;
}

Json HarnessConfig::to_json() const {
    Json j;
    j["execution"] = {{"benchmark", execution.benchmark},         {"initial_cash", execution.initial_cash},
                      {"buy_cost_bps", execution.buy_cost_bps},   {"sell_cost_bps", execution.sell_cost_bps},
                      {"min_cost", execution.min_cost},           {"deal_price", execution.deal_price},
                      {"t_plus_1", execution.t_plus_1},           {"long_only", execution.long_only}};
    j["agent"] = {{"max_candidates_per_step", agent.max_candidates_per_step},
                  {"max_tool_calls_per_step", agent.max_tool_calls_per_step},
                  {"max_positions_held", agent.max_positions_held},
                  {"max_single_weight", agent.max_single_weight},
                  {"schema_retries", agent.schema_retries},
                  {"retry_with_feedback", agent.retry_with_feedback},
                  {"min_reason_length", agent.min_reason_length},
                  {"fallback_action", agent.fallback_action},
                  {"min_overall_reason_length", agent.min_overall_reason_length},
                  {"lenient_fences", agent.lenient_fences},
                  {"obs_window", agent.obs_window}};
    j["llm"] = {{"temperature", llm.temperature},
                {"max_tokens", llm.max_tokens},
                {"timeout_s", llm.timeout_s},
                {"inter_call_gap_s", llm.inter_call_gap_s}};
    return j;
}

namespace {

template <class T>
void read(const Json& group, const std::string& gname, const char* key, T& out) {
    const auto it = group.find(key);
    if (it == group.end()) return;
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw std::invalid_argument("expected a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw std::invalid_argument("expected a string");
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!it->is_number_unsigned() && !(it->is_number_integer() && it->template get<std::int64_t>() >= 0))
                throw std::invalid_argument("expected a non-negative integer");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
        } else {
            if (!it->is_number()) throw std::invalid_argument("expected a number");
        }
        out = it->template get<T>();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("config " + gname + "." + key + ": " + e.what());
    }
}

void check_known(const Json& group, const std::string& gname, const Json& defaults) {
    if (!group.is_object()) throw std::invalid_argument("config " + gname + " must be an object");
    for (const auto& [k, v] : group.items())
        if (!defaults.contains(k)) throw std::invalid_argument("config " + gname + "." + k + ": unknown key");
}

}  // namespace

HarnessConfig HarnessConfig::from_json(const Json& j) {
    HarnessConfig c;
    if (j.is_null()) return c;
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    const Json defaults = c.to_json();
    for (const auto& [k, v] : j.items())
        if (!defaults.contains(k)) throw std::invalid_argument("config: unknown group '" + k + "'");

    if (j.contains("execution")) {
        const Json& g = j["execution"];
        check_known(g, "execution", defaults["execution"]);
        auto& e = c.execution;
        read(g, "execution", "benchmark", e.benchmark);
        read(g, "execution", "initial_cash", e.initial_cash);
        read(g, "execution", "buy_cost_bps", e.buy_cost_bps);
        read(g, "execution", "sell_cost_bps", e.sell_cost_bps);
        read(g, "execution", "min_cost", e.min_cost);
        read(g, "execution", "deal_price", e.deal_price);
        read(g, "execution", "t_plus_1", e.t_plus_1);
        read(g, "execution", "long_only", e.long_only);
        if (e.deal_price != "next_open") throw std::invalid_argument("config execution.deal_price: only next_open is supported");
        if (!e.t_plus_1) throw std::invalid_argument("config execution.t_plus_1: only T+1 settlement is supported");
        if (!e.long_only) throw std::invalid_argument("config execution.long_only: short selling is not supported");
        if (e.initial_cash <= 0) throw std::invalid_argument("config execution.initial_cash must be positive");
        if (e.buy_cost_bps < 0 || e.sell_cost_bps < 0 || e.min_cost < 0)
            throw std::invalid_argument("config execution costs must be non-negative");
    }
    if (j.contains("agent")) {
        const Json& g = j["agent"];
        check_known(g, "agent", defaults["agent"]);
        auto& a = c.agent;
        read(g, "agent", "max_candidates_per_step", a.max_candidates_per_step);
        read(g, "agent", "max_tool_calls_per_step", a.max_tool_calls_per_step);
        read(g, "agent", "max_positions_held", a.max_positions_held);
        read(g, "agent", "max_single_weight", a.max_single_weight);
        read(g, "agent", "schema_retries", a.schema_retries);
        read(g, "agent", "retry_with_feedback", a.retry_with_feedback);
        read(g, "agent", "min_reason_length", a.min_reason_length);
        read(g, "agent", "fallback_action", a.fallback_action);
        read(g, "agent", "min_overall_reason_length", a.min_overall_reason_length);
        read(g, "agent", "lenient_fences", a.lenient_fences);
        read(g, "agent", "obs_window", a.obs_window);
        if (a.fallback_action != "hold") throw std::invalid_argument("config agent.fallback_action: only hold is supported");
        if (a.max_single_weight <= 0 || a.max_single_weight > 1)
            throw std::invalid_argument("config agent.max_single_weight must be in (0, 1]");
        if (a.max_candidates_per_step == 0) throw std::invalid_argument("config agent.max_candidates_per_step must be positive");
        if (a.obs_window == 0 || a.obs_window > 60) throw std::invalid_argument("config agent.obs_window must be in [1, 60]");
    }
    if (j.contains("llm")) {
        const Json& g = j["llm"];
        check_known(g, "llm", defaults["llm"]);
        read(g, "llm", "temperature", c.llm.temperature);
        read(g, "llm", "max_tokens", c.llm.max_tokens);
        read(g, "llm", "timeout_s", c.llm.timeout_s);
        read(g, "llm", "inter_call_gap_s", c.llm.inter_call_gap_s);
        if (c.llm.timeout_s <= 0) throw std::invalid_argument("config llm.timeout_s must be positive");
    }
    return c;
}

HarnessConfig HarnessConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument("config " + path + ": " + e.what());
    }
    return from_json(j);
}

std::vector<ConfigKeyDoc> config_keys() {
    const Json d = HarnessConfig{}.to_json();
    static const std::map<std::string, std::string> desc = {
        {"execution.benchmark", "benchmark label shown to agents"},
        {"execution.initial_cash", "starting cash, CNY"},
        {"execution.buy_cost_bps", "buy cost, basis points of notional"},
        {"execution.sell_cost_bps", "sell cost, basis points of notional"},
        {"execution.min_cost", "minimum cost per order, CNY"},
        {"execution.deal_price", "fill price (next_open only)"},
        {"execution.t_plus_1", "T+1 settlement (must be true)"},
        {"execution.long_only", "long-only book (must be true)"},
        {"agent.max_candidates_per_step", "largest screen_candidates top_k"},
        {"agent.max_tool_calls_per_step", "tool-call budget per step"},
        {"agent.max_positions_held", "holdings cap checked at validation"},
        {"agent.max_single_weight", "largest target_weight accepted"},
        {"agent.schema_retries", "extra submission attempts after a violation"},
        {"agent.retry_with_feedback", "send violation details before re-demanding"},
        {"agent.min_reason_length", "minimum characters per order reason"},
        {"agent.fallback_action", "action when retries run out (hold)"},
        {"agent.min_overall_reason_length", "minimum characters of overall_reason"},
        {"agent.lenient_fences", "strip markdown fences instead of rejecting"},
        {"agent.obs_window", "observation window quoted in the user message"},
        {"llm.temperature", "forwarded to adapters"},
        {"llm.max_tokens", "forwarded to adapters"},
        {"llm.timeout_s", "per-message agent timeout, seconds"},
        {"llm.inter_call_gap_s", "forwarded to adapters"},
    };
    std::vector<ConfigKeyDoc> out;
    for (const auto& [g, group] : d.items())
        for (const auto& [k, v] : group.items()) {
            const std::string key = g + "." + k;
            const auto it = desc.find(key);
            out.push_back({key, v.dump(), it == desc.end() ? "" : it->second});
        }
    return out;
}

}  // namespace blindtrade::harness
