#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blindtrade/data/market_store.hpp"

namespace blindtrade::data {

/// Prompt/tool features as of a decision day, from bars strictly before it.
struct FeatureRow {
    std::string ticker;
    DayIndex asof = 0;
    std::optional<double> prev_close;
    std::optional<double> ret_1d, ret_5d, ret_20d;
    std::optional<double> vol_20d;
    std::optional<double> drawdown_20d;
    bool partial = false;  // fewer than 21 prior bars
    bool missing = false;  // ticker not in the store

    std::optional<double> get(std::string_view field) const;
};

/// Sortable feature fields, in tool-schema order.
inline constexpr std::array<std::string_view, 6> kFeatureFields = {
    "prev_close", "ret_1d", "ret_5d", "ret_20d", "vol_20d", "drawdown_20d"};

bool is_feature_field(std::string_view name);

FeatureRow feature_row(const MarketStore& store, TickerId id, DayIndex asof);
std::vector<FeatureRow> features(const MarketStore& store, DayIndex asof, std::span<const std::string> tickers);

}  // namespace blindtrade::data
