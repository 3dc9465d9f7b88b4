#include "blindtrade/data/features.hpp"

#include <algorithm>

#include "blindtrade/core/stats.hpp"

namespace blindtrade::data {

std::optional<double> FeatureRow::get(std::string_view field) const {
    if (field == "prev_close") return prev_close;
    if (field == "ret_1d") return ret_1d;
    if (field == "ret_5d") return ret_5d;
    if (field == "ret_20d") return ret_20d;
    if (field == "vol_20d") return vol_20d;
    if (field == "drawdown_20d") return drawdown_20d;
    return std::nullopt;
}

bool is_feature_field(std::string_view name) {
    return std::find(kFeatureFields.begin(), kFeatureFields.end(), name) != kFeatureFields.end();
}

FeatureRow feature_row(const MarketStore& store, TickerId id, DayIndex asof) {
    FeatureRow row;
    row.ticker = store.ticker(id);
    row.asof = asof;
    const auto days = store.bar_days(id);
    const auto n = store.bars_before(id, asof);
    row.partial = n < 21;
    // c(j): close of the j-th most recent bar before asof, j >= 1.
    auto c = [&](std::size_t j) { return store.bar(id, days[n - j])->close; };

    if (n >= 1) row.prev_close = c(1);
    if (n >= 2) row.ret_1d = c(1) / c(2) - 1.0;
    if (n >= 6) row.ret_5d = c(1) / c(6) - 1.0;
    if (n >= 21) {
        row.ret_20d = c(1) / c(21) - 1.0;
        std::vector<double> rets;
        for (std::size_t j = 1; j <= 20; ++j) rets.push_back(c(j) / c(j + 1) - 1.0);
        row.vol_20d = stats::sample_std(rets);
    }
    if (n >= 20) {
        double peak = 0.0, dd = 0.0;
        for (std::size_t j = 20; j >= 1; --j) {
            peak = std::max(peak, c(j));
            dd = std::min(dd, c(j) / peak - 1.0);
        }
        row.drawdown_20d = dd;
    }
    return row;
}

std::vector<FeatureRow> features(const MarketStore& store, DayIndex asof, std::span<const std::string> tickers) {
    std::vector<FeatureRow> out;
    out.reserve(tickers.size());
    for (const auto& t : tickers) {
        if (const auto id = store.id_of(t)) {
            out.push_back(feature_row(store, *id, asof));
        } else {
            FeatureRow row;
            row.ticker = t;
            row.asof = asof;
            row.partial = true;
            row.missing = true;
            out.push_back(std::move(row));
        }
    }
    return out;
}

}  // namespace blindtrade::data
