#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "blindtrade/core/json.hpp"
#include "blindtrade/data/features.hpp"
#include "blindtrade/execution/executor.hpp"
#include "blindtrade/harness/action.hpp"
#include "blindtrade/masking/payload.hpp"
#include "blindtrade/tools/tools.hpp"

namespace blindtrade::harness {

/// Text of a shipped prompt asset (system_open_research, system_fixed_candidate,
/// system_memory_only, user_message). Throws std::out_of_range for unknown names.
std::string_view prompt_asset(std::string_view name);
std::string_view system_prompt(DecisionMode mode);

/// Replaces each {key} with its value. Throws std::invalid_argument if a
/// placeholder is left unfilled.
std::string fill_template(std::string_view text, const std::vector<std::pair<std::string, std::string>>& values);

/// "1,234,567"
std::string format_grouped(std::int64_t n);
/// Grouped integer part, fixed decimals: "1,000,000.00".
std::string format_amount(double x, int decimals = 2);
/// Signed percentage: "+1.23%".
std::string format_percent(double fraction, int decimals = 2);

/// The FIXED_CANDIDATE pool: union of the top names by ret_1d, ret_5d, ret_20d and the
/// lowest vol_20d, `per_list` from each, capped at `cap`, in render order.
std::vector<data::FeatureRow> fixed_candidate_pool(const tools::ToolContext& ctx, std::size_t per_list, std::size_t cap);

/// Masked-ready summary of one step's fills and rejections.
masking::Node execution_summary(const execution::StepResult& result);

struct StepView {
    DecisionMode mode = DecisionMode::OpenResearch;
    int step = 0;
    const tools::ToolContext* ctx = nullptr;
    std::vector<data::FeatureRow> candidates;         // FIXED_CANDIDATE only
    std::optional<masking::Node> prev_execution;      // none on the first step
    double portfolio_ret_cum = 0.0;
    std::optional<double> benchmark_ret_cum;
    std::string benchmark_name = "CSI300";
    std::size_t obs_window = 20;
};

struct RenderedMessage {
    std::string content;  // filled user-message template, identifiers rendered
    Json data;            // the same facts as masked JSON for programmatic agents
};

RenderedMessage render_user_message(const StepView& view);

}  // namespace blindtrade::harness
