#include "blindtrade/tools/tools.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "blindtrade/core/error.hpp"
#include "blindtrade/masking/mask.hpp"

namespace blindtrade::tools {

using masking::Node;

bool is_tool(std::string_view name) {
    return std::find(kToolNames.begin(), kToolNames.end(), name) != kToolNames.end();
}

namespace {

Node stamped(const ToolContext& ctx) {
    Node n = Node::object();
    n.set("as_of_date", Node::date(ctx.day));
    n.set("data_cutoff", Node::date(ctx.day - 1));
    return n;
}

std::optional<double> index_return(const data::MarketStore& store, data::DayIndex cutoff, int k) {
    const auto level = store.index_level();
    if (cutoff - k < 0 || cutoff < 0) return std::nullopt;
    return level[cutoff] / level[cutoff - k] - 1.0;
}

std::optional<double> last_close(const data::MarketStore& store, const std::string& ticker, data::DayIndex day) {
    const auto id = store.id_of(ticker);
    if (!id) return std::nullopt;
    const auto prev = store.last_bar_before(*id, day);
    if (!prev) return std::nullopt;
    return store.bar(*id, *prev)->close;
}

/// Orders real tickers the way the agent sees them.
void sort_rendered(std::vector<std::string>& tickers, const masking::AliasMap& map) {
    std::vector<std::pair<std::string, std::string>> keyed;
    keyed.reserve(tickers.size());
    for (auto& t : tickers) keyed.emplace_back(map.render_ticker(t), std::move(t));
    std::sort(keyed.begin(), keyed.end());
    tickers.clear();
    for (auto& [r, t] : keyed) tickers.push_back(std::move(t));
}

const Json& arg(const Json& args, std::string_view key) {
    static const Json null;
    if (!args.is_object()) return null;
    const auto it = args.find(key);
    return it == args.end() ? null : *it;
}

void check_keys(const Json& args, std::initializer_list<std::string_view> allowed) {
    if (args.is_null()) return;
    if (!args.is_object()) throw InvalidArgument("$", "arguments must be a JSON object");
    for (const auto& [k, v] : args.items())
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw InvalidArgument("$." + k, "unexpected argument");
}

std::size_t int_arg(const Json& args, std::string_view key, std::size_t fallback, std::size_t lo, std::size_t hi) {
    const Json& v = arg(args, key);
    if (v.is_null()) return fallback;
    const std::string path = "$." + std::string(key);
    if (!v.is_number_integer() && !(v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()))
        throw InvalidArgument(path, "must be an integer");
    const double x = v.get<double>();
    if (x < static_cast<double>(lo) || x > static_cast<double>(hi))
        throw InvalidArgument(path, "must be between " + std::to_string(lo) + " and " + std::to_string(hi));
    return static_cast<std::size_t>(x);
}

std::string feature_arg(const Json& v, const std::string& path) {
    if (!v.is_string()) throw InvalidArgument(path, "must be a feature name string");
    const auto name = v.get<std::string>();
    if (!data::is_feature_field(name))
        throw InvalidArgument(path, "unknown feature; expected one of prev_close, ret_1d, ret_5d, ret_20d, vol_20d, "
                                    "drawdown_20d");
    return name;
}

}  // namespace

Node feature_node(const data::FeatureRow& row) {
    Node n = Node::object();
    n.set("stock_id", Node::ticker(row.ticker));
    for (auto f : data::kFeatureFields) n.set(std::string(f), Node::optional(row.get(f)));
    return n;
}

std::vector<std::string> tradable_universe(const ToolContext& ctx) {
    std::vector<std::string> out;
    for (auto id : ctx.store.tradable(ctx.day)) out.push_back(ctx.store.ticker(id));
    sort_rendered(out, ctx.map);
    return out;
}

std::vector<data::FeatureRow> ranked_features(const ToolContext& ctx, std::string_view field) {
    const auto universe = tradable_universe(ctx);  // already in render order
    std::vector<data::FeatureRow> rows;
    for (const auto& t : universe) {
        auto r = data::feature_row(ctx.store, *ctx.store.id_of(t), ctx.day);
        if (r.get(field)) rows.push_back(std::move(r));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const auto& a, const auto& b) { return *a.get(field) > *b.get(field); });
    return rows;
}

LimitFlags last_bar_limit_flags(const data::MarketStore& store, data::TickerId id, data::DayIndex day) {
    LimitFlags f;
    const auto last = store.last_bar_before(id, day);
    if (!last) return f;
    const auto before = store.last_bar_before(id, *last);
    if (!before) return f;
    const double c = store.bar(id, *last)->close;
    const double p = store.bar(id, *before)->close;
    const double lim = store.board(id).limit_pct;
    f.limit_up_hit = c >= p * (1.0 + lim) * (1.0 - 1e-12);
    f.limit_down_hit = c <= p * (1.0 - lim) * (1.0 + 1e-12);
    return f;
}

Node market_context(const ToolContext& ctx) {
    Node n = stamped(ctx);
    n.set("contains_current_day_market_data", false);
    n.set("market", ctx.market);
    n.set("universe_size", static_cast<std::int64_t>(ctx.store.tradable(ctx.day).size()));
    Node index = Node::object();
    index.set("name", "equal_weight_universe");
    const auto r1 = index_return(ctx.store, ctx.day - 1, 1);
    const auto r5 = index_return(ctx.store, ctx.day - 1, 5);
    index.set("ret_1d", Node::optional(r1));
    index.set("ret_5d", Node::optional(r5));
    index.set("ret_20d", Node::optional(index_return(ctx.store, ctx.day - 1, 20)));
    n.set("index", std::move(index));
    std::string tone = "unknown";
    if (r5) tone = *r5 > 0.01 ? "risk-on" : *r5 < -0.01 ? "risk-off" : "neutral";
    n.set("sector_tone", tone);
    Node cal = Node::object();
    cal.set("previous_trading_day", Node::date(ctx.day - 1));
    // The history length pins the absolute calendar position.
    if (!masking::masks_dates(ctx.map.level())) cal.set("observable_trading_days", static_cast<std::int64_t>(ctx.day));
    n.set("calendar", std::move(cal));
    return n;
}

Node screen_candidates(const ToolContext& ctx, std::string_view sort_by, std::size_t top_k) {
    const auto rows = ranked_features(ctx, sort_by);
    Node n = stamped(ctx);
    n.set("sort_by", std::string(sort_by));
    Node list = Node::array();
    for (std::size_t i = 0; i < rows.size() && i < top_k; ++i) {
        Node r = feature_node(rows[i]);
        r.set("rank", static_cast<std::int64_t>(i + 1));
        list.push(std::move(r));
    }
    n.set("candidates", std::move(list));
    return n;
}

Node stock_snapshot(const ToolContext& ctx, const std::string& ticker, std::size_t lookback) {
    const auto id = ctx.store.id_of(ticker);
    if (!id) throw InvalidArgument("$.stock_id", "unknown stock id");
    const auto row = data::feature_row(ctx.store, *id, ctx.day);
    const auto& board = ctx.store.board(*id);

    Node n = stamped(ctx);
    n.set("stock_id", Node::ticker(ticker));
    n.set("board", std::string(data::board_name(board.board)));
    n.set("limit_pct", board.limit_pct);
    n.set("prev_close", Node::optional(row.prev_close));
    n.set("limit_up", row.prev_close ? Node(*row.prev_close * (1.0 + board.limit_pct)) : Node(nullptr));
    n.set("limit_down", row.prev_close ? Node(*row.prev_close * (1.0 - board.limit_pct)) : Node(nullptr));
    n.set("tradable", ctx.store.is_member(*id, ctx.day) && row.prev_close.has_value());

    Node feats = Node::object();
    for (auto f : data::kFeatureFields)
        if (f != "prev_close") feats.set(std::string(f), Node::optional(row.get(f)));
    n.set("features", std::move(feats));

    const auto days = ctx.store.bar_days(*id);
    const auto end = std::lower_bound(days.begin(), days.end(), ctx.day);
    const auto begin = end - static_cast<std::ptrdiff_t>(std::min<std::size_t>(lookback, end - days.begin()));
    Node bars = Node::array();
    for (auto it = begin; it != end; ++it) {
        const auto* b = ctx.store.bar(*id, *it);
        Node bn = Node::object();
        bn.set("date", Node::date(*it));
        bn.set("open", b->open);
        bn.set("high", b->high);
        bn.set("low", b->low);
        bn.set("close", b->close);
        bn.set("volume", b->volume);
        bn.set("amount", b->amount);
        bars.push(std::move(bn));
    }
    n.set("bars", std::move(bars));

    Node warnings = Node::array();
    const auto flags = last_bar_limit_flags(ctx.store, *id, ctx.day);
    if (flags.limit_up_hit) warnings.push("LIMIT_UP_HIT_PREV_DAY");
    if (flags.limit_down_hit) warnings.push("LIMIT_DOWN_HIT_PREV_DAY");
    if (row.partial) warnings.push("PARTIAL_HISTORY");
    if (!ctx.store.is_member(*id, ctx.day)) warnings.push("NOT_IN_UNIVERSE");
    n.set("warnings", std::move(warnings));
    return n;
}

Node compare_candidates(const ToolContext& ctx, const std::vector<std::string>& tickers,
                        const std::vector<std::string>& dims, std::size_t duplicates_removed) {
    std::vector<data::FeatureRow> rows;
    for (const auto& t : tickers) {
        const auto id = ctx.store.id_of(t);
        if (!id) throw InvalidArgument("$.stock_ids", "unknown stock id");
        rows.push_back(data::feature_row(ctx.store, *id, ctx.day));
    }
    std::vector<std::string> rendered;
    for (const auto& t : tickers) rendered.push_back(ctx.map.render_ticker(t));

    // rank[d][i]: 1 = largest; nulls unranked.
    std::vector<std::vector<std::optional<std::int64_t>>> ranks(dims.size(), std::vector<std::optional<std::int64_t>>(rows.size()));
    for (std::size_t d = 0; d < dims.size(); ++d) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].get(dims[d])) order.push_back(i);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double x = *rows[a].get(dims[d]), y = *rows[b].get(dims[d]);
            return x != y ? x > y : rendered[a] < rendered[b];
        });
        for (std::size_t r = 0; r < order.size(); ++r) ranks[d][order[r]] = static_cast<std::int64_t>(r + 1);
    }

    Node n = stamped(ctx);
    Node dn = Node::array();
    for (const auto& d : dims) dn.push(d);
    n.set("dims", std::move(dn));
    Node grid = Node::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Node r = Node::object();
        r.set("stock_id", Node::ticker(tickers[i]));
        Node values = Node::object(), rk = Node::object();
        for (std::size_t d = 0; d < dims.size(); ++d) {
            values.set(dims[d], Node::optional(rows[i].get(dims[d])));
            rk.set(dims[d], Node::optional(ranks[d][i]));
        }
        r.set("values", std::move(values));
        r.set("ranks", std::move(rk));
        grid.push(std::move(r));
    }
    n.set("grid", std::move(grid));
    Node notes = Node::array();
    if (duplicates_removed)
        notes.push("removed " + std::to_string(duplicates_removed) + " duplicate stock id(s)");
    n.set("notes", std::move(notes));
    return n;
}

Node portfolio_state(const ToolContext& ctx) {
    const auto& acct = ctx.account;
    std::vector<std::string> held;
    for (const auto& [t, p] : acct.positions) held.push_back(t);
    sort_rendered(held, ctx.map);

    double total = acct.cash.cny();
    std::vector<double> value(held.size()), price(held.size());
    for (std::size_t i = 0; i < held.size(); ++i) {
        price[i] = last_close(ctx.store, held[i], ctx.day).value_or(0.0);
        value[i] = static_cast<double>(acct.positions.at(held[i]).shares_total) * price[i];
        total += value[i];
    }

    Node n = stamped(ctx);
    n.set("valuation", "close of data_cutoff");
    n.set("total_value", total);
    n.set("cash", acct.cash.cny());
    n.set("cash_weight", total > 0 ? acct.cash.cny() / total : 1.0);
    n.set("num_positions", static_cast<std::int64_t>(held.size()));
    Node list = Node::array();
    for (std::size_t i = 0; i < held.size(); ++i) {
        const auto& p = acct.positions.at(held[i]);
        Node r = Node::object();
        r.set("stock_id", Node::ticker(held[i]));
        r.set("shares_total", p.shares_total);
        r.set("shares_available", p.shares_available);
        r.set("avg_cost", p.avg_cost());
        r.set("last_close", price[i]);
        r.set("market_value", value[i]);
        r.set("weight", total > 0 ? value[i] / total : 0.0);
        r.set("unrealized_pnl", value[i] - p.cost_basis.cny());
        list.push(std::move(r));
    }
    n.set("positions", std::move(list));
    return n;
}

Node risk_check(const ToolContext& ctx, const std::vector<execution::Order>& orders) {
    execution::Account sim = ctx.account;
    sim.nav_series.clear();
    const auto& store = ctx.store;
    const data::DayIndex day = ctx.day;
    // Next open unknown: every price is the last close, so limits never bind here.
    execution::QuoteSource quotes = [&store, day](const std::string& t) -> std::optional<execution::Quote> {
        const auto id = store.id_of(t);
        if (!id || !store.is_member(*id, day)) return std::nullopt;
        const auto prev = store.last_bar_before(*id, day);
        if (!prev || *prev != day - 1) return std::nullopt;
        const double c = store.bar(*id, *prev)->close;
        return execution::Quote{c, c, c, c, store.board(*id).limit_pct};
    };
    const auto fallback = execution::last_close_before(store, day);
    const auto res = execution::execute(sim, orders, quotes, fallback, ctx.costs, day);

    Node n = stamped(ctx);
    n.set("valid", res.rejections.empty());
    Node violations = Node::array();
    for (const auto& r : res.rejections) {
        Node v = Node::object();
        v.set("order_index", static_cast<std::int64_t>(r.order_index));
        v.set("stock_id", Node::ticker(r.order.ticker));
        v.set("code", std::string(execution::reject_code_name(r.code)));
        v.set("detail", r.detail);
        violations.push(std::move(v));
    }
    n.set("violations", std::move(violations));

    Node warnings = Node::array();
    for (std::size_t i = 0; i < orders.size(); ++i) {
        const auto id = store.id_of(orders[i].ticker);
        if (!id) continue;
        const auto flags = last_bar_limit_flags(store, *id, day);
        const bool buy = orders[i].side == execution::Side::Buy;
        if ((buy && flags.limit_up_hit) || (!buy && flags.limit_down_hit)) {
            Node w = Node::object();
            w.set("order_index", static_cast<std::int64_t>(i));
            w.set("stock_id", Node::ticker(orders[i].ticker));
            w.set("code", buy ? "LIMIT_UP_RISK" : "LIMIT_DOWN_RISK");
            w.set("detail", buy ? "closed at the upper limit on the cutoff day; a limit-up open would reject the BUY"
                                : "closed at the lower limit on the cutoff day; a limit-down open would reject the SELL");
            warnings.push(std::move(w));
        }
    }
    n.set("warnings", std::move(warnings));

    std::vector<std::string> held;
    for (const auto& [t, p] : sim.positions) held.push_back(t);
    sort_rendered(held, ctx.map);
    double total = sim.cash.cny();
    std::vector<double> value;
    for (const auto& t : held) {
        value.push_back(static_cast<double>(sim.positions.at(t).shares_total) * fallback(t));
        total += value.back();
    }
    Node weights = Node::object();
    for (std::size_t i = 0; i < held.size(); ++i)
        weights.set(masking::TickerRef{held[i]}, total > 0 ? value[i] / total : 0.0);
    n.set("projected_weights", std::move(weights));
    n.set("projected_cash_weight", total > 0 ? sim.cash.cny() / total : 1.0);
    return n;
}

ToolResult call_tool(const ToolContext& ctx, std::string_view name, const Json& args) {
    ToolResult out;
    auto fail = [&](std::string code, std::string message, std::string path) {
        Node n = stamped(ctx);
        Node e = Node::object();
        e.set("code", code);
        e.set("message", message);
        e.set("path", path);
        n.set("error", std::move(e));
        out.ok = false;
        out.payload = masking::mask(n, ctx.map);
        out.error_code = std::move(code);
        out.error_message = std::move(message);
        return out;
    };
    if (!is_tool(name)) return fail("UNKNOWN_TOOL", "no tool named '" + std::string(name) + "'", "$");

    try {
        Node result;
        if (name == "get_market_context") {
            check_keys(args, {});
            result = market_context(ctx);
        } else if (name == "screen_candidates") {
            check_keys(args, {"sort_by", "top_k"});
            const Json& s = arg(args, "sort_by");
            const std::string sort_by = s.is_null() ? "ret_20d" : feature_arg(s, "$.sort_by");
            result = screen_candidates(ctx, sort_by, int_arg(args, "top_k", 20, 1, ctx.max_candidates));
        } else if (name == "get_stock_snapshot") {
            check_keys(args, {"stock_id", "lookback"});
            const Json& id = arg(args, "stock_id");
            if (!id.is_string()) throw InvalidArgument("$.stock_id", "stock_id is required and must be a string");
            const auto ticker = ctx.map.resolve_ticker(id.get<std::string>(), "$.stock_id");
            result = stock_snapshot(ctx, ticker, int_arg(args, "lookback", 20, 1, 60));
        } else if (name == "compare_candidates") {
            check_keys(args, {"stock_ids", "ids", "dims"});
            const bool alt = arg(args, "stock_ids").is_null();
            const std::string key = alt ? "ids" : "stock_ids";
            const Json& ids = arg(args, key);
            if (!ids.is_array()) throw InvalidArgument("$.stock_ids", "stock_ids is required and must be an array");
            if (ids.size() < 2 || ids.size() > 10)
                throw InvalidArgument("$." + key, "between 2 and 10 stock ids are required");
            std::vector<std::string> tickers;
            std::set<std::string> seen;
            std::size_t dup = 0;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const std::string p = "$." + key + "[" + std::to_string(i) + "]";
                if (!ids[i].is_string()) throw InvalidArgument(p, "must be a string");
                auto t = ctx.map.resolve_ticker(ids[i].get<std::string>(), p);
                if (seen.insert(t).second)
                    tickers.push_back(std::move(t));
                else
                    ++dup;
            }
            if (tickers.size() < 2) throw InvalidArgument("$." + key, "at least 2 distinct stock ids are required");
            std::vector<std::string> dims;
            const Json& d = arg(args, "dims");
            if (d.is_null()) {
                for (auto f : data::kFeatureFields) dims.emplace_back(f);
            } else {
                if (!d.is_array() || d.empty()) throw InvalidArgument("$.dims", "must be a non-empty array of feature names");
                for (std::size_t i = 0; i < d.size(); ++i) {
                    auto f = feature_arg(d[i], "$.dims[" + std::to_string(i) + "]");
                    if (std::find(dims.begin(), dims.end(), f) == dims.end()) dims.push_back(std::move(f));
                }
            }
            result = compare_candidates(ctx, tickers, dims, dup);
        } else if (name == "portfolio_state") {
            check_keys(args, {});
            result = portfolio_state(ctx);
        } else {
            check_keys(args, {"draft_orders"});
            std::vector<execution::Order> orders;
            const auto v = harness::parse_orders(arg(args, "draft_orders"), "$.draft_orders", ctx.map, ctx.limits, orders);
            if (!v.empty()) throw InvalidArgument(v.front().path, v.front().message);
            result = risk_check(ctx, orders);
        }
        out.ok = true;
        out.payload = masking::mask(result, ctx.map);
        return out;
    } catch (const InvalidArgument& e) {
        std::string msg = e.what();
        if (!e.path().empty() && msg.starts_with(e.path() + ": ")) msg = msg.substr(e.path().size() + 2);
        return fail("INVALID_ARGUMENT", msg, e.path());
    }
}

}  // namespace blindtrade::tools
