#include "blindtrade/masking/mask.hpp"

#include <cctype>

#include "blindtrade/core/error.hpp"
#include "blindtrade/data/board.hpp"

namespace blindtrade::masking {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string key_text(const Node::Key& k, const AliasMap& map) {
    return std::visit(overloaded{[](const std::string& s) { return s; },
                                 [&](const TickerRef& t) { return map.render_ticker(t.ticker); }},
                      k);
}

Node unmask_value(const Json& j, const AliasMap& map, const FieldSchema& schema, const std::string& path);

Node unmask_object(const Json& j, const AliasMap& map, const FieldSchema& schema, const std::string& path) {
    Node out = Node::object();
    for (const auto& [k, v] : j.items()) {
        const std::string p = path + "." + k;
        if (schema.ticker_keyed_fields.contains(k) && v.is_object()) {
            Node inner = Node::object();
            for (const auto& [tk, tv] : v.items())
                inner.set(TickerRef{map.resolve_ticker(tk, p + "." + tk)}, unmask_value(tv, map, schema, p + "." + tk));
            out.set(k, std::move(inner));
        } else if (schema.ticker_fields.contains(k) && v.is_string()) {
            out.set(k, Node::ticker(map.resolve_ticker(v.get<std::string>(), p)));
        } else if (schema.ticker_fields.contains(k) && v.is_array()) {
            Node arr = Node::array();
            std::size_t i = 0;
            for (const auto& e : v) {
                const std::string ep = p + "[" + std::to_string(i++) + "]";
                if (!e.is_string()) throw InvalidArgument(ep, "stock id must be a string");
                arr.push(Node::ticker(map.resolve_ticker(e.get<std::string>(), ep)));
            }
            out.set(k, std::move(arr));
        } else if (schema.date_fields.contains(k) && v.is_string()) {
            out.set(k, Node::date(map.resolve_date(v.get<std::string>(), p)));
        } else {
            out.set(k, unmask_value(v, map, schema, p));
        }
    }
    return out;
}

Node unmask_value(const Json& j, const AliasMap& map, const FieldSchema& schema, const std::string& path) {
    switch (j.type()) {
        case Json::value_t::null: return Node(nullptr);
        case Json::value_t::boolean: return Node(j.get<bool>());
        case Json::value_t::number_integer: return Node(j.get<std::int64_t>());
        case Json::value_t::number_unsigned: return Node(static_cast<std::int64_t>(j.get<std::uint64_t>()));
        case Json::value_t::number_float: return Node(j.get<double>());
        case Json::value_t::string: return Node(j.get<std::string>());
        case Json::value_t::array: {
            Node arr = Node::array();
            std::size_t i = 0;
            for (const auto& e : j) arr.push(unmask_value(e, map, schema, path + "[" + std::to_string(i++) + "]"));
            return arr;
        }
        case Json::value_t::object: return unmask_object(j, map, schema, path);
        default: throw InvalidArgument(path, "unsupported JSON value");
    }
}

void scan_node(const Json& j, const AliasMap& map, const std::string& path, std::vector<Leak>& out) {
    if (j.is_string()) {
        auto leaks = leak_scan_text(j.get_ref<const std::string&>(), map, path);
        out.insert(out.end(), leaks.begin(), leaks.end());
    } else if (j.is_array()) {
        std::size_t i = 0;
        for (const auto& e : j) scan_node(e, map, path + "[" + std::to_string(i++) + "]", out);
    } else if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            auto leaks = leak_scan_text(k, map, path + ".<key>");
            out.insert(out.end(), leaks.begin(), leaks.end());
            scan_node(v, map, path + "." + k, out);
        }
    }
}

}  // namespace

const FieldSchema& FieldSchema::wire() {
    static const FieldSchema s{
        {"stock_id", "ticker", "ids", "stock_ids", "ticker_top5", "universe"},
        {"as_of_date", "data_cutoff", "date", "window_start", "window_end", "date_label", "date_guess"},
        {"projected_weights", "weights", "current_weights"},
    };
    return s;
}

Json mask(const Node& payload, const AliasMap& map) {
    return std::visit(
        overloaded{
            [](std::nullptr_t) { return Json(nullptr); },
            [](bool b) { return Json(b); },
            [](std::int64_t i) { return Json(i); },
            [](double d) { return Json(d); },
            [](const std::string& s) { return Json(s); },
            [&](const TickerRef& t) { return Json(map.render_ticker(t.ticker)); },
            [&](const DateRef& d) { return Json(map.render_date(d.day)); },
            [&](const Node::Array& a) {
                Json out = Json::array();
                for (const auto& e : a) out.push_back(mask(e, map));
                return out;
            },
            [&](const Node::Object& o) {
                Json out = Json::object();
                for (const auto& [k, v] : o) out[key_text(k, map)] = mask(v, map);
                return out;
            },
        },
        payload.value());
}

Node unmask(const Json& payload, const AliasMap& map, const FieldSchema& schema) {
    return unmask_value(payload, map, schema, "$");
}

std::string_view leak_kind_name(LeakKind k) {
    switch (k) {
        case LeakKind::Ticker: return "ticker";
        case LeakKind::TickerCode: return "ticker_code";
        case LeakKind::Date: return "date";
    }
    return "ticker";
}

std::vector<Leak> leak_scan_text(std::string_view text, const AliasMap& map, const std::string& path) {
    std::vector<Leak> out;
    const bool tickers = masks_tickers(map.level());
    const bool dates = masks_dates(map.level());
    if (!tickers && !dates) return out;

    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    if (tickers) {
        for (std::size_t i = 0; i < text.size();) {
            if (!is_digit(text[i])) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < text.size() && is_digit(text[j])) ++j;
            if (j - i == 6) {
                const std::string code(text.substr(i, 6));
                if (const std::string* real = map.ticker_by_code(code)) {
                    std::string prefix;
                    if (i >= 2) {
                        prefix = std::string(text.substr(i - 2, 2));
                        for (auto& c : prefix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                    }
                    if (prefix + code == *real)
                        out.push_back({LeakKind::Ticker, *real, path});
                    else
                        out.push_back({LeakKind::TickerCode, code, path});
                }
            }
            i = j;
        }
    }
    if (dates) {
        for (std::size_t i = 0; i + 10 <= text.size(); ++i) {
            if (i > 0 && is_digit(text[i - 1])) continue;
            if (i + 10 < text.size() && is_digit(text[i + 10])) continue;
            const auto tok = text.substr(i, 10);
            if (Date::looks_like_iso(tok)) out.push_back({LeakKind::Date, std::string(tok), path});
        }
    }
    return out;
}

std::vector<Leak> leak_scan(const Json& payload, const AliasMap& map) {
    std::vector<Leak> out;
    scan_node(payload, map, "$", out);
    return out;
}

}  // namespace blindtrade::masking
