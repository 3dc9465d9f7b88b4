#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "blindtrade/data/market_store.hpp"

namespace blindtrade::data {

enum class Regime { Default, Bull, Bear, Sideways };

Regime parse_regime(std::string_view name);

struct SynthParams {
    std::uint64_t seed = 1;
    int n_stocks = 50;
    int n_days = 400;
    Regime regime = Regime::Default;
    Date first_day = Date(2020, 1, 2);
};

/// Deterministic GBM-style market: one common factor plus idiosyncratic noise,
/// per-stock volatility drawn from the regime profile, lognormal amounts, boards
/// assigned round-robin. Prices are on the 0.01 CNY tick and moves respect the
/// official board limits. Requires n_stocks >= 2 and n_days >= 300.
MarketStore synth_market(const SynthParams& params);

}  // namespace blindtrade::data
