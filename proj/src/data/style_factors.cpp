#include "blindtrade/data/style_factors.hpp"

#include <algorithm>
#include <cmath>

#include "blindtrade/core/stats.hpp"

namespace blindtrade::data {

namespace {

constexpr double kAmountUnit = 1e8;

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    const double ma = stats::mean(a), mb = stats::mean(b);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

std::optional<double> skewness(std::span<const double> v) {
    const double m = stats::mean(v);
    double m2 = 0, m3 = 0;
    for (double x : v) {
        m2 += (x - m) * (x - m);
        m3 += (x - m) * (x - m) * (x - m);
    }
    m2 /= static_cast<double>(v.size());
    m3 /= static_cast<double>(v.size());
    if (m2 <= 1e-30) return std::nullopt;
    return m3 / std::pow(m2, 1.5);
}

}  // namespace

std::string_view factor_name(StyleFactor f) { return kStyleFactorNames[static_cast<std::size_t>(f)]; }

std::optional<StyleFactor> parse_factor(std::string_view name) {
    for (std::size_t k = 0; k < kStyleFactorCount; ++k)
        if (kStyleFactorNames[k] == name) return static_cast<StyleFactor>(k);
    return std::nullopt;
}

StyleExposureRow style_row(const MarketStore& store, TickerId id, DayIndex asof) {
    StyleExposureRow row;
    row.ticker = store.ticker(id);
    row.asof = asof;
    const auto days = store.bar_days(id);
    const auto n = store.bars_before(id, asof);
    // b(j): the j-th most recent bar strictly before asof, j >= 1.
    auto b = [&](std::size_t j) -> const DailyBar& { return *store.bar(id, days[n - j]); };
    auto ret = [&](std::size_t j) { return b(j).close / b(j + 1).close - 1.0; };
    auto set = [&](StyleFactor f, std::optional<double> v) { row.x[static_cast<std::size_t>(f)] = v; };

    if (n >= 252) {
        set(StyleFactor::Mom12_1, b(21).close / b(252).close - 1.0);
        double hi = 0.0;
        for (std::size_t j = 1; j <= 252; ++j) hi = std::max(hi, b(j).close);
        set(StyleFactor::High52w, b(1).close / hi);
    }
    if (n >= 61) {
        std::vector<double> r;
        for (std::size_t j = 1; j <= 60; ++j) r.push_back(ret(j));
        set(StyleFactor::Rv60, stats::sample_std(r));
        if (const auto s = skewness(r)) set(StyleFactor::Skew, -*s);
    }
    if (n >= 21) {
        double illiq = 0.0;
        std::size_t used = 0;
        std::vector<double> r, amt, gap;
        for (std::size_t j = 1; j <= 20; ++j) {
            const double rj = ret(j);
            r.push_back(rj);
            amt.push_back(b(j).amount);
            gap.push_back(b(j).open / b(j + 1).close - 1.0);
            if (b(j).amount > 0.0) {
                illiq += std::abs(rj) / (b(j).amount / kAmountUnit);
                ++used;
            }
        }
        if (used) set(StyleFactor::Illiq, illiq / static_cast<double>(used));
        set(StyleFactor::RevOn, stats::mean(gap));
        set(StyleFactor::CorrPv, pearson(r, amt));
    }
    if (n >= 20) {
        std::vector<double> intraday, amt;
        for (std::size_t j = 1; j <= 20; ++j) {
            intraday.push_back(b(j).close / b(j).open - 1.0);
            amt.push_back(b(j).amount);
        }
        set(StyleFactor::MomId, stats::mean(intraday));
        const double m = stats::mean(amt);
        if (m > 0.0) set(StyleFactor::CvVol, *stats::sample_std(amt) / m);
    }
    return row;
}

std::vector<StyleExposureRow> style_exposures(const MarketStore& store, DayIndex asof,
                                              std::span<const std::string> tickers) {
    std::vector<StyleExposureRow> out;
    out.reserve(tickers.size());
    for (const auto& t : tickers) {
        if (const auto id = store.id_of(t)) {
            out.push_back(style_row(store, *id, asof));
        } else {
            StyleExposureRow row;
            row.ticker = t;
            row.asof = asof;
            out.push_back(std::move(row));
        }
    }
    return out;
}

}  // namespace blindtrade::data
