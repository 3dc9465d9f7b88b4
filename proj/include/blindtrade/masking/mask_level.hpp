#pragma once

#include <string_view>

namespace blindtrade::masking {

enum class MaskLevel { Bright, StockBlind, DateBlind, Blinded };

inline constexpr MaskLevel kAllLevels[] = {MaskLevel::Bright, MaskLevel::StockBlind, MaskLevel::DateBlind,
                                           MaskLevel::Blinded};

constexpr bool masks_tickers(MaskLevel l) { return l == MaskLevel::StockBlind || l == MaskLevel::Blinded; }
constexpr bool masks_dates(MaskLevel l) { return l == MaskLevel::DateBlind || l == MaskLevel::Blinded; }

std::string_view level_name(MaskLevel l);
/// Accepts bright, stock_blind, date_blind, blinded (also with '-').
MaskLevel parse_level(std::string_view name);

}  // namespace blindtrade::masking
