#pragma once

#include "blindtrade/probe/probe.hpp"

namespace bt_test {

/// Reads the target back out of a probe payload using the map it was rendered with.
inline blindtrade::probe::Answer cheating_answer(const blindtrade::probe::Probe& p,
                                                 const blindtrade::data::MarketStore& store) {
    const auto map = blindtrade::probe::probe_alias_map(store, p.gold);
    const auto ticker = map.resolve_ticker(p.payload["get_stock_snapshot"]["stock_id"].get<std::string>());
    const auto day = map.resolve_date(p.payload["get_market_context"]["as_of_date"].get<std::string>());
    blindtrade::probe::Answer a;
    a.probe_id = p.id;
    a.ticker_top5 = {ticker};
    a.date_guess = store.calendar().at(day);
    a.board_guess = std::string(blindtrade::data::board_name(store.board(*store.id_of(ticker)).board));
    return a;
}

}  // namespace bt_test
