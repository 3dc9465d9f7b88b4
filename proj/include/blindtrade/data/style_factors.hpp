#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blindtrade/data/market_store.hpp"

namespace blindtrade::data {

enum class StyleFactor : std::size_t {
    Mom12_1,  // close[-21] / close[-252] - 1
    Rv60,     // std of 60 daily returns
    Illiq,    // mean |ret| / amount (1e8 CNY) over 20 days, zero-amount days skipped
    RevOn,    // mean open / prev_close - 1 over 20 days
    MomId,    // mean close / open - 1 over 20 days
    Skew,     // minus sample skewness of 60 daily returns
    CorrPv,   // Pearson corr(daily return, amount) over 20 days
    High52w,  // close[-1] / max close over 252 days
    CvVol,    // std / mean of amount over 20 days
};

inline constexpr std::size_t kStyleFactorCount = 9;
inline constexpr std::array<std::string_view, kStyleFactorCount> kStyleFactorNames = {
    "MOM_12_1", "RV_60", "ILLIQ", "REV_ON", "MOM_ID", "SKEW", "CORR_PV", "HIGH_52W", "CV_VOL"};

std::string_view factor_name(StyleFactor f);
std::optional<StyleFactor> parse_factor(std::string_view name);

/// Raw (unstandardized) factor values; nullopt marks insufficient history or an undefined value.
struct StyleExposureRow {
    std::string ticker;
    DayIndex asof = 0;
    std::array<std::optional<double>, kStyleFactorCount> x{};

    const std::optional<double>& operator[](StyleFactor f) const { return x[static_cast<std::size_t>(f)]; }
};

StyleExposureRow style_row(const MarketStore& store, TickerId id, DayIndex asof);
std::vector<StyleExposureRow> style_exposures(const MarketStore& store, DayIndex asof,
                                              std::span<const std::string> tickers);

}  // namespace blindtrade::data
