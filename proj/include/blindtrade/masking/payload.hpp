#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string_view>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "blindtrade/data/calendar.hpp"

namespace blindtrade::masking {

/// A real ticker carried by a payload; rendered through the alias map.
struct TickerRef {
    std::string ticker;
    friend bool operator==(const TickerRef&, const TickerRef&) = default;
};

/// A trading day carried by a payload; rendered as ISO or a relative index.
struct DateRef {
    data::DayIndex day = 0;
    friend bool operator==(const DateRef&, const DateRef&) = default;
};

/// Agent-visible payload with every identifying handle typed at construction.
///
/// Masking is driven by these types rather than by pattern matching on text:
/// a TickerRef leaf or key is always a ticker, a number is always a number.
class Node {
public:
    using Key = std::variant<std::string, TickerRef>;
    using Array = std::vector<Node>;
    using Object = std::vector<std::pair<Key, Node>>;
    using Value = std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, TickerRef, DateRef, Array, Object>;

    Node() : v_(nullptr) {}
    Node(std::nullptr_t) : v_(nullptr) {}
    Node(bool b) : v_(b) {}
    Node(int i) : v_(static_cast<std::int64_t>(i)) {}
    Node(std::int64_t i) : v_(i) {}
    Node(double d) : v_(d) {}
    Node(const char* s) : v_(std::string(s)) {}
    Node(std::string s) : v_(std::move(s)) {}
    Node(TickerRef t) : v_(std::move(t)) {}
    Node(DateRef d) : v_(d) {}
    Node(Array a) : v_(std::move(a)) {}
    Node(Object o) : v_(std::move(o)) {}

    static Node object() { return Node(Object{}); }
    static Node array() { return Node(Array{}); }
    static Node ticker(std::string t) { return Node(TickerRef{std::move(t)}); }
    static Node date(data::DayIndex d) { return Node(DateRef{d}); }
    template <class T>
    static Node optional(const std::optional<T>& v) { return v ? Node(*v) : Node(nullptr); }

    /// Appends a field (object nodes only).
    Node& set(Key key, Node value);
    /// Appends an element (array nodes only).
    Node& push(Node value);

    const Value& value() const { return v_; }
    Value& value() { return v_; }
    /// Field lookup by plain key; nullptr when absent or not an object.
    const Node* find(std::string_view key) const;

    friend bool operator==(const Node&, const Node&) = default;

private:
    Value v_;
};

}  // namespace blindtrade::masking
