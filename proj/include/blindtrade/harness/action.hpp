#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "blindtrade/core/json.hpp"
#include "blindtrade/execution/order.hpp"
#include "blindtrade/masking/alias_map.hpp"

namespace blindtrade::harness {

enum class DecisionMode { MemoryOnly, FixedCandidate, OpenResearch };

inline constexpr DecisionMode kAllModes[] = {DecisionMode::MemoryOnly, DecisionMode::FixedCandidate,
                                             DecisionMode::OpenResearch};

std::string_view mode_name(DecisionMode m);
/// memory_only, fixed_candidate, open_research (also with '-').
DecisionMode parse_mode(std::string_view name);

enum class ViolationCode {
    ParseError,        // not a single JSON object
    Schema,            // missing/mistyped field, both or neither sizing field, short reason, ...
    UnknownId,         // stock_id the alias map cannot resolve
    NotInCandidates,   // BUY outside the fixed candidate pool
    WeightLimit,       // target_weight above max_single_weight
    PositionLimit,     // holdings after BUYs would exceed max_positions_held
    ToolAfterDemand,   // tool call after the submission demand
    ToolForbidden,     // tool call in a tool-less mode
    BudgetExhausted,   // tool call beyond the per-step budget
    UnknownMessage,    // unparseable or unknown message type
    Timeout,           // no message within the configured timeout, or stream closed
};

std::string_view violation_code_name(ViolationCode c);

struct Violation {
    ViolationCode code;
    std::string path;
    std::string message;
};

struct ActionLimits {
    std::size_t min_reason_length = 10;
    std::size_t min_overall_reason_length = 20;
    double max_single_weight = 1.0;
    std::size_t max_positions_held = 300;
    /// Strip ```json fences instead of rejecting them.
    bool lenient_fences = false;
};

/// What the validator needs to know about the step. Tickers are real.
struct ValidationContext {
    const masking::AliasMap* map = nullptr;
    ActionLimits limits;
    DecisionMode mode = DecisionMode::OpenResearch;
    const std::set<std::string>* candidate_pool = nullptr;  // FIXED_CANDIDATE only
    const std::set<std::string>* holdings = nullptr;
};

struct ActionDocument {
    std::vector<execution::Order> orders;  // real tickers
    std::string overall_reason;
    Json submitted;                        // the parsed object as the agent wrote it
    bool fences_stripped = false;
};

using ValidationResult = std::variant<ActionDocument, std::vector<Violation>>;

ValidationResult validate_action(std::string_view raw, const ValidationContext& ctx);
ValidationResult validate_action(const Json& doc, const ValidationContext& ctx);

/// Validates an `orders` array (shared with risk_check). Appends resolved orders to `out`.
std::vector<Violation> parse_orders(const Json& orders, const std::string& path, const masking::AliasMap& map,
                                    const ActionLimits& limits, std::vector<execution::Order>& out);

/// Length in Unicode code points of UTF-8 text.
std::size_t text_length(std::string_view utf8);

/// One sentence per violation, "code at path: message".
std::string describe(const std::vector<Violation>& violations);

}  // namespace blindtrade::harness
