#include "blindtrade/masking/payload.hpp"

#include <stdexcept>

namespace blindtrade::masking {

Node& Node::set(Key key, Node value) {
    auto* obj = std::get_if<Object>(&v_);
    if (!obj) throw std::logic_error("Node::set on a non-object");
    obj->emplace_back(std::move(key), std::move(value));
    return *this;
}

Node& Node::push(Node value) {
    auto* arr = std::get_if<Array>(&v_);
    if (!arr) throw std::logic_error("Node::push on a non-array");
    arr->push_back(std::move(value));
    return *this;
}

const Node* Node::find(std::string_view key) const {
    const auto* obj = std::get_if<Object>(&v_);
    if (!obj) return nullptr;
    for (const auto& [k, v] : *obj)
        if (const auto* s = std::get_if<std::string>(&k); s && *s == key) return &v;
    return nullptr;
}

}  // namespace blindtrade::masking
