#include "blindtrade/harness/action.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "blindtrade/core/error.hpp"

namespace blindtrade::harness {

std::string_view mode_name(DecisionMode m) {
    switch (m) {
        case DecisionMode::MemoryOnly: return "memory_only";
        case DecisionMode::FixedCandidate: return "fixed_candidate";
        case DecisionMode::OpenResearch: return "open_research";
    }
    return "open_research";
}

DecisionMode parse_mode(std::string_view name) {
    std::string s(name);
    for (auto& c : s) c = c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto m : kAllModes)
        if (mode_name(m) == s) return m;
    throw std::invalid_argument("unknown decision mode '" + std::string(name) + "'");
}

std::string_view violation_code_name(ViolationCode c) {
    switch (c) {
        case ViolationCode::ParseError: return "PARSE_ERROR";
        case ViolationCode::Schema: return "SCHEMA";
        case ViolationCode::UnknownId: return "UNKNOWN_ID";
        case ViolationCode::NotInCandidates: return "NOT_IN_CANDIDATES";
        case ViolationCode::WeightLimit: return "WEIGHT_LIMIT";
        case ViolationCode::PositionLimit: return "POSITION_LIMIT";
        case ViolationCode::ToolAfterDemand: return "TOOL_AFTER_DEMAND";
        case ViolationCode::ToolForbidden: return "TOOL_FORBIDDEN";
        case ViolationCode::BudgetExhausted: return "BUDGET_EXHAUSTED";
        case ViolationCode::UnknownMessage: return "UNKNOWN_MESSAGE";
        case ViolationCode::Timeout: return "TIMEOUT";
    }
    return "SCHEMA";
}

std::size_t text_length(std::string_view utf8) {
    std::size_t n = 0;
    for (unsigned char c : utf8)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

std::string describe(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += '\n';
        out += std::string(violation_code_name(v.code));
        if (!v.path.empty()) out += " at " + v.path;
        out += ": " + v.message;
    }
    return out;
}

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

std::optional<double> number(const Json& j) {
    if (!j.is_number()) return std::nullopt;
    const double v = j.get<double>();
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

/// Drops a surrounding ``` / ```json fence; returns false when none was present.
bool strip_fences(std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    const auto last = text.find_last_not_of(" \t\r\n");
    if (first == std::string::npos) return false;
    std::string_view t(text.data() + first, last - first + 1);
    if (!t.starts_with("```") || !t.ends_with("```") || t.size() < 6) return false;
    t.remove_prefix(3);
    t.remove_suffix(3);
    const auto nl = t.find('\n');
    if (nl == std::string_view::npos) return false;
    t.remove_prefix(nl + 1);
    text = std::string(t);
    return true;
}

}  // namespace

std::vector<Violation> parse_orders(const Json& orders, const std::string& path, const masking::AliasMap& map,
                                    const ActionLimits& limits, std::vector<execution::Order>& out) {
    std::vector<Violation> v;
    if (!orders.is_array()) {
        v.push_back({ViolationCode::Schema, path, "`orders` must be an array"});
        return v;
    }
    for (std::size_t i = 0; i < orders.size(); ++i) {
        const Json& o = orders[i];
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (!o.is_object()) {
            v.push_back({ViolationCode::Schema, p, "each order must be an object"});
            continue;
        }
        const std::size_t before = v.size();
        execution::Order order;

        if (!o.contains("stock_id") || !o["stock_id"].is_string()) {
            v.push_back({ViolationCode::Schema, p + ".stock_id", "`stock_id` is required and must be a string"});
        } else {
            try {
                order.ticker = map.resolve_ticker(o["stock_id"].get<std::string>(), p + ".stock_id");
            } catch (const InvalidArgument&) {
                v.push_back({ViolationCode::UnknownId, p + ".stock_id", "`stock_id` is not an identifier from the input"});
            }
        }

        if (!o.contains("side") || !o["side"].is_string()) {
            v.push_back({ViolationCode::Schema, p + ".side", "`side` is required and must be \"BUY\" or \"SELL\""});
        } else if (o["side"] == "BUY") {
            order.side = execution::Side::Buy;
        } else if (o["side"] == "SELL") {
            order.side = execution::Side::Sell;
        } else {
            v.push_back({ViolationCode::Schema, p + ".side", "`side` must be \"BUY\" or \"SELL\""});
        }

        const bool has_w = o.contains("target_weight") && !o["target_weight"].is_null();
        const bool has_s = o.contains("shares") && !o["shares"].is_null();
        if (has_w == has_s) {
            v.push_back({ViolationCode::Schema, p,
                         has_w ? "`target_weight` and `shares` are mutually exclusive"
                               : "exactly one of `target_weight` or `shares` is required"});
        } else if (has_w) {
            const auto w = number(o["target_weight"]);
            if (!w || *w < 0.0 || *w > 1.0) {
                v.push_back({ViolationCode::Schema, p + ".target_weight", "`target_weight` must be a number in [0, 1]"});
            } else if (*w > limits.max_single_weight) {
                v.push_back({ViolationCode::WeightLimit, p + ".target_weight",
                             "`target_weight` exceeds the maximum single weight " + fmt(limits.max_single_weight)});
            } else {
                order.target_weight = *w;
            }
        } else {
            const Json& s = o["shares"];
            const auto x = number(s);
            if (!x || *x <= 0.0 || std::floor(*x) != *x || *x > 9.0e15) {
                v.push_back({ViolationCode::Schema, p + ".shares", "`shares` must be a positive integer"});
            } else {
                order.shares = static_cast<std::int64_t>(*x);
            }
        }

        if (!o.contains("confidence")) {
            v.push_back({ViolationCode::Schema, p + ".confidence", "`confidence` is required"});
        } else if (const auto c = number(o["confidence"]); !c || *c < 0.0 || *c > 1.0) {
            v.push_back({ViolationCode::Schema, p + ".confidence", "`confidence` must be a number in [0, 1]"});
        } else {
            order.confidence = *c;
        }

        if (!o.contains("reason") || !o["reason"].is_string()) {
            v.push_back({ViolationCode::Schema, p + ".reason", "`reason` is required and must be a string"});
        } else {
            order.reason = o["reason"].get<std::string>();
            if (text_length(order.reason) < limits.min_reason_length)
                v.push_back({ViolationCode::Schema, p + ".reason",
                             "`reason` must be at least " + std::to_string(limits.min_reason_length) + " characters"});
        }

        if (v.size() == before) out.push_back(std::move(order));
    }
    return v;
}

ValidationResult validate_action(const Json& doc, const ValidationContext& ctx) {
    std::vector<Violation> v;
    if (!ctx.map) throw PreconditionError("validate_action: no alias map");
    if (!doc.is_object()) {
        v.push_back({ViolationCode::ParseError, "$", "the decision must be a single JSON object"});
        return v;
    }
    ActionDocument action;
    action.submitted = doc;

    if (!doc.contains("orders")) {
        v.push_back({ViolationCode::Schema, "$.orders", "`orders` is required (use [] for no action)"});
    } else {
        auto ov = parse_orders(doc["orders"], "$.orders", *ctx.map, ctx.limits, action.orders);
        v.insert(v.end(), ov.begin(), ov.end());
    }

    if (!doc.contains("overall_reason") || !doc["overall_reason"].is_string()) {
        v.push_back({ViolationCode::Schema, "$.overall_reason", "`overall_reason` is required and must be a string"});
    } else {
        action.overall_reason = doc["overall_reason"].get<std::string>();
        if (text_length(action.overall_reason) < ctx.limits.min_overall_reason_length)
            v.push_back({ViolationCode::Schema, "$.overall_reason",
                         "`overall_reason` must be at least " + std::to_string(ctx.limits.min_overall_reason_length) +
                             " characters"});
    }

    if (!v.empty()) return v;

    std::set<std::string> book = ctx.holdings ? *ctx.holdings : std::set<std::string>{};
    for (std::size_t i = 0; i < action.orders.size(); ++i) {
        const auto& o = action.orders[i];
        if (o.side != execution::Side::Buy) continue;
        const std::string p = "$.orders[" + std::to_string(i) + "].stock_id";
        if (ctx.mode == DecisionMode::FixedCandidate && ctx.candidate_pool && !ctx.candidate_pool->contains(o.ticker) &&
            !book.contains(o.ticker))
            v.push_back({ViolationCode::NotInCandidates, p, "BUY is only allowed for names in the fixed candidate pool"});
        book.insert(o.ticker);
    }
    if (book.size() > ctx.limits.max_positions_held)
        v.push_back({ViolationCode::PositionLimit, "$.orders",
                     "holdings would exceed the maximum of " + std::to_string(ctx.limits.max_positions_held) +
                         " positions"});
    if (!v.empty()) return v;
    return action;
}

ValidationResult validate_action(std::string_view raw, const ValidationContext& ctx) {
    std::string text(raw);
    bool stripped = false;
    if (ctx.limits.lenient_fences) stripped = strip_fences(text);
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error&) {
        return std::vector<Violation>{{ViolationCode::ParseError, "$",
                                       "the submission is not valid JSON; emit a single JSON object with no "
                                       "markdown fences or surrounding text"}};
    }
    auto result = validate_action(doc, ctx);
    if (auto* a = std::get_if<ActionDocument>(&result)) a->fences_stripped = stripped;
    return result;
}

}  // namespace blindtrade::harness
