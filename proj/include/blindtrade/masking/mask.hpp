#pragma once

#include <set>
#include <string>
#include <vector>

#include "blindtrade/core/json.hpp"
#include "blindtrade/masking/alias_map.hpp"
#include "blindtrade/masking/payload.hpp"

namespace blindtrade::masking {

/// Field names whose values (or keys) carry identifying handles on the wire.
/// Unmasking is driven by this schema; masking by the payload's own types.
struct FieldSchema {
    std::set<std::string, std::less<>> ticker_fields;        // string or array of strings
    std::set<std::string, std::less<>> date_fields;          // string
    std::set<std::string, std::less<>> ticker_keyed_fields;  // object keyed by ticker

    /// The schema shared by every tool argument and return payload.
    static const FieldSchema& wire();
};

/// Renders a typed payload for the agent. Numeric leaves are copied unchanged.
Json mask(const Node& payload, const AliasMap& map);

/// Inverse of mask for payloads whose handles sit under schema fields.
/// Throws InvalidArgument (with the JSON path) for unknown aliases or malformed day labels.
Node unmask(const Json& payload, const AliasMap& map, const FieldSchema& schema = FieldSchema::wire());

enum class LeakKind { Ticker, TickerCode, Date };

struct Leak {
    LeakKind kind;
    std::string token;
    std::string path;
    friend bool operator==(const Leak&, const Leak&) = default;
};

std::string_view leak_kind_name(LeakKind k);

/// Every real ticker, bare 6-digit ticker code, or ISO date found in a string leaf
/// or object key, for the field classes the map's level masks. Empty means clean.
std::vector<Leak> leak_scan(const Json& payload, const AliasMap& map);

/// Scans free text (rendered prompts) the same way.
std::vector<Leak> leak_scan_text(std::string_view text, const AliasMap& map, const std::string& path = {});

}  // namespace blindtrade::masking
