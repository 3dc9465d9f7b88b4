#pragma once

#include <json.hpp>

namespace blindtrade {

/// Insertion-ordered JSON so every serialized artifact is byte-stable.
using Json = nlohmann::ordered_json;

}  // namespace blindtrade
