#include "blindtrade/harness/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "blindtrade/masking/mask.hpp"

namespace blindtrade::harness {

using masking::Node;

namespace {

struct Asset {
    std::string_view name;
    std::string_view text;
};

constexpr Asset kAssets[] = {
#include "blindtrade/prompt_assets.inc"
};

std::string fixed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

std::string opt(const std::optional<double>& v, int decimals) { return v ? fixed(*v, decimals) : "n/a"; }

}  // namespace

std::string_view prompt_asset(std::string_view name) {
    for (const auto& a : kAssets)
        if (a.name == name) return a.text;
    throw std::out_of_range("no prompt asset named '" + std::string(name) + "'");
}

std::string_view system_prompt(DecisionMode mode) {
    switch (mode) {
        case DecisionMode::MemoryOnly: return prompt_asset("system_memory_only");
        case DecisionMode::FixedCandidate: return prompt_asset("system_fixed_candidate");
        case DecisionMode::OpenResearch: return prompt_asset("system_open_research");
    }
    return prompt_asset("system_open_research");
}

std::string fill_template(std::string_view text, const std::vector<std::pair<std::string, std::string>>& values) {
    std::map<std::string, std::string, std::less<>> lookup(values.begin(), values.end());
    std::string out;
    out.reserve(text.size() * 2);
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] == '{') {
            const auto close = text.find('}', i);
            if (close != std::string_view::npos) {
                const auto key = text.substr(i + 1, close - i - 1);
                const bool ident = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
                    return (c >= 'a' && c <= 'z') || c == '_' || (c >= '0' && c <= '9');
                });
                if (ident) {
                    const auto it = lookup.find(key);
                    if (it == lookup.end()) throw std::invalid_argument("unfilled placeholder {" + std::string(key) + "}");
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += text[i++];
    }
    return out;
}

std::string format_grouped(std::int64_t n) {
    const bool neg = n < 0;
    std::string digits = std::to_string(neg ? -n : n);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i && (digits.size() - i) % 3 == 0) out += ',';
        out += digits[i];
    }
    return neg ? "-" + out : out;
}

std::string format_amount(double x, int decimals) {
    std::string s = fixed(std::abs(x), decimals);
    const auto dot = s.find('.');
    const std::string frac = dot == std::string::npos ? "" : s.substr(dot);
    const auto whole = static_cast<std::int64_t>(std::llround(std::stod(s.substr(0, dot))));
    return (x < 0 && s.find_first_not_of("0.") != std::string::npos ? "-" : "") + format_grouped(whole) + frac;
}

std::string format_percent(double fraction, int decimals) {
    const double p = fraction * 100.0;
    std::string s = fixed(p, decimals);
    if (s.front() != '-') s = "+" + s;
    return s + "%";
}

std::vector<data::FeatureRow> fixed_candidate_pool(const tools::ToolContext& ctx, std::size_t per_list, std::size_t cap) {
    std::set<std::string> picked;
    std::vector<data::FeatureRow> rows;
    auto take = [&](std::vector<data::FeatureRow> ranked) {
        for (std::size_t i = 0; i < ranked.size() && i < per_list; ++i)
            if (picked.insert(ranked[i].ticker).second) rows.push_back(std::move(ranked[i]));
    };
    take(tools::ranked_features(ctx, "ret_1d"));
    take(tools::ranked_features(ctx, "ret_5d"));
    take(tools::ranked_features(ctx, "ret_20d"));
    auto calm = tools::ranked_features(ctx, "vol_20d");
    std::stable_sort(calm.begin(), calm.end(), [](const auto& a, const auto& b) { return *a.vol_20d < *b.vol_20d; });
    take(std::move(calm));
    if (rows.size() > cap) rows.resize(cap);
    std::vector<std::pair<std::string, data::FeatureRow>> keyed;
    for (auto& r : rows) keyed.emplace_back(ctx.map.render_ticker(r.ticker), std::move(r));
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    rows.clear();
    for (auto& [k, r] : keyed) rows.push_back(std::move(r));
    return rows;
}

Node execution_summary(const execution::StepResult& result) {
    Node fills = Node::array();
    for (const auto& f : result.fills) {
        Node n = Node::object();
        n.set("order_index", static_cast<std::int64_t>(f.order_index));
        n.set("stock_id", Node::ticker(f.ticker));
        n.set("side", std::string(execution::side_name(f.side)));
        n.set("shares", f.shares);
        n.set("intended_shares", f.intended_shares);
        n.set("price", f.price);
        n.set("notional", f.notional.cny());
        n.set("cost", f.cost.cny());
        fills.push(std::move(n));
    }
    Node rejections = Node::array();
    for (const auto& r : result.rejections) {
        Node n = Node::object();
        n.set("order_index", static_cast<std::int64_t>(r.order_index));
        n.set("stock_id", Node::ticker(r.order.ticker));
        n.set("side", std::string(execution::side_name(r.order.side)));
        n.set("code", std::string(execution::reject_code_name(r.code)));
        n.set("detail", r.detail);
        rejections.push(std::move(n));
    }
    Node out = Node::object();
    out.set("fills", std::move(fills));
    out.set("rejections", std::move(rejections));
    return out;
}

namespace {

const Node& field(const Node& n, std::string_view key) {
    static const Node null;
    const Node* f = n.find(key);
    return f ? *f : null;
}

double num(const Node& n) {
    if (const auto* d = std::get_if<double>(&n.value())) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&n.value())) return static_cast<double>(*i);
    return 0.0;
}

std::string summary_text(const Node& summary, const masking::AliasMap& map) {
    std::string out;
    const auto& fills = std::get<Node::Array>(field(summary, "fills").value());
    const auto& rejections = std::get<Node::Array>(field(summary, "rejections").value());
    for (const auto& f : fills) {
        const auto& t = std::get<masking::TickerRef>(field(f, "stock_id").value());
        out += "- FILLED " + std::get<std::string>(field(f, "side").value()) + " " + map.render_ticker(t.ticker) + ": " +
               format_grouped(static_cast<std::int64_t>(num(field(f, "shares")))) + " shares @ " +
               fixed(num(field(f, "price")), 3) + ", cost " + format_amount(num(field(f, "cost"))) + " CNY\n";
    }
    for (const auto& r : rejections) {
        const auto& t = std::get<masking::TickerRef>(field(r, "stock_id").value());
        out += "- REJECTED " + std::get<std::string>(field(r, "side").value()) + " " + map.render_ticker(t.ticker) +
               ": " + std::get<std::string>(field(r, "code").value()) + " (" +
               std::get<std::string>(field(r, "detail").value()) + ")\n";
    }
    if (out.empty()) out = "- no orders were submitted\n";
    out.pop_back();
    return out;
}

}  // namespace

RenderedMessage render_user_message(const StepView& view) {
    const auto& ctx = *view.ctx;
    const auto& map = ctx.map;
    const auto universe = tools::tradable_universe(ctx);
    const Node account = tools::portfolio_state(ctx);

    // Positions table
    std::string positions;
    const auto& plist = std::get<Node::Array>(field(account, "positions").value());
    if (plist.empty()) {
        positions = "(none)";
    } else {
        positions = "| stock_id | shares_total | shares_available | last_close | weight |\n|---|---|---|---|---|";
        for (const auto& p : plist) {
            const auto& t = std::get<masking::TickerRef>(field(p, "stock_id").value());
            positions += "\n| " + map.render_ticker(t.ticker) + " | " +
                         format_grouped(static_cast<std::int64_t>(num(field(p, "shares_total")))) + " | " +
                         format_grouped(static_cast<std::int64_t>(num(field(p, "shares_available")))) + " | " +
                         fixed(num(field(p, "last_close")), 3) + " | " + fixed(num(field(p, "weight")), 4) + " |";
        }
    }

    std::string preview;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        if (i) preview += (i % 10 == 0) ? ",\n" : ", ";
        preview += map.render_ticker(universe[i]);
    }
    if (preview.empty()) preview = "(empty)";

    std::string features;
    if (view.mode == DecisionMode::FixedCandidate && !view.candidates.empty()) {
        features = "| stock_id | prev_close | ret_1d | ret_5d | ret_20d | vol_20d | drawdown_20d |\n|---|---|---|---|---|---|---|";
        for (const auto& r : view.candidates)
            features += "\n| " + map.render_ticker(r.ticker) + " | " + opt(r.prev_close, 3) + " | " + opt(r.ret_1d, 4) +
                        " | " + opt(r.ret_5d, 4) + " | " + opt(r.ret_20d, 4) + " | " + opt(r.vol_20d, 4) + " | " +
                        opt(r.drawdown_20d, 4) + " |";
    } else if (view.mode == DecisionMode::OpenResearch) {
        features = "(not included; use the research tools)";
    } else {
        features = "(not provided in this mode)";
    }
    const std::size_t features_count = view.mode == DecisionMode::FixedCandidate ? view.candidates.size() : 0;

    const std::string prev =
        view.prev_execution ? summary_text(*view.prev_execution, map) : std::string("- none (first step)");

    const double total = num(field(account, "total_value"));
    const double cash = num(field(account, "cash"));
    RenderedMessage out;
    out.content = fill_template(
        prompt_asset("user_message"),
        {{"date_label", map.render_date(ctx.day)},
         {"allow_short", "no"},
         {"total_value", format_amount(total)},
         {"cash", format_amount(cash)},
         {"cash_weight", fixed(num(field(account, "cash_weight")) * 100.0, 2) + "%"},
         {"num_positions", std::to_string(plist.size())},
         {"positions_table", positions},
         {"universe_size", std::to_string(universe.size())},
         {"universe_preview", preview},
         {"obs_window", std::to_string(view.obs_window)},
         {"features_count", std::to_string(features_count)},
         {"features_table", features},
         {"prev_execution_summary", prev},
         {"portfolio_ret_cum", format_percent(view.portfolio_ret_cum)},
         {"benchmark_name", view.benchmark_name},
         {"benchmark_ret_cum", view.benchmark_ret_cum ? format_percent(*view.benchmark_ret_cum) : "n/a"}});

    Node data = Node::object();
    data.set("step", static_cast<std::int64_t>(view.step));
    data.set("mode", std::string(mode_name(view.mode)));
    data.set("date_label", Node::date(ctx.day));
    data.set("data_cutoff", Node::date(ctx.day - 1));
    Node u = Node::array();
    for (const auto& t : universe) u.push(Node::ticker(t));
    data.set("universe", std::move(u));
    data.set("account", account);
    Node cands = Node::array();
    for (const auto& r : view.candidates) cands.push(tools::feature_node(r));
    data.set("candidates", std::move(cands));
    data.set("prev_execution", view.prev_execution ? *view.prev_execution : Node(nullptr));
    data.set("portfolio_ret_cum", view.portfolio_ret_cum);
    data.set("benchmark_ret_cum", Node::optional(view.benchmark_ret_cum));
    Node limits = Node::object();
    limits.set("max_candidates_per_step", static_cast<std::int64_t>(ctx.max_candidates));
    limits.set("min_reason_length", static_cast<std::int64_t>(ctx.limits.min_reason_length));
    limits.set("min_overall_reason_length", static_cast<std::int64_t>(ctx.limits.min_overall_reason_length));
    limits.set("max_single_weight", ctx.limits.max_single_weight);
    data.set("limits", std::move(limits));
    out.data = masking::mask(data, map);
    return out;
}

}  // namespace blindtrade::harness
