#include "blindtrade/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "blindtrade/core/error.hpp"
#include "blindtrade/core/rng.hpp"

namespace blindtrade::data {

namespace {

struct RegimeProfile {
    double market_drift;
    double market_vol;
    double idio_vol_lo;
    double idio_vol_hi;
};

RegimeProfile profile(Regime r) {
    switch (r) {
        case Regime::Bull: return {0.0015, 0.011, 0.010, 0.028};
        case Regime::Bear: return {-0.0012, 0.015, 0.012, 0.032};
        case Regime::Sideways: return {0.0, 0.008, 0.008, 0.022};
        case Regime::Default: break;
    }
    return {0.0003, 0.012, 0.010, 0.030};
}

double tick(double p) { return std::max(0.01, std::round(p * 100.0) / 100.0); }

std::string make_ticker(Board b, int serial) {
    char buf[16];
    switch (b) {
        case Board::Main: std::snprintf(buf, sizeof buf, "SH60%04d", serial); break;
        case Board::ChiNext: std::snprintf(buf, sizeof buf, "SZ30%04d", serial); break;
        case Board::Star: std::snprintf(buf, sizeof buf, "SH688%03d", serial); break;
        case Board::Bse: std::snprintf(buf, sizeof buf, "BJ83%04d", serial); break;
    }
    return buf;
}

double official_limit(Board b) {
    switch (b) {
        case Board::Main: return 0.10;
        case Board::ChiNext:
        case Board::Star: return 0.20;
        case Board::Bse: return 0.30;
    }
    return 0.10;
}

}  // namespace

Regime parse_regime(std::string_view name) {
    if (name == "default") return Regime::Default;
    if (name == "bull") return Regime::Bull;
    if (name == "bear") return Regime::Bear;
    if (name == "sideways") return Regime::Sideways;
    throw std::invalid_argument("unknown regime '" + std::string(name) + "'");
}

MarketStore synth_market(const SynthParams& p) {
    if (p.n_stocks < 2) throw PreconditionError("synth_market: n_stocks must be >= 2");
    if (p.n_stocks > 4000) throw PreconditionError("synth_market: n_stocks must be <= 4000");
    if (p.n_days < 300) throw PreconditionError("synth_market: n_days must be >= 300");

    std::vector<Date> days;
    for (Date d = p.first_day; static_cast<int>(days.size()) < p.n_days; d = d + 1)
        if (d.weekday() != 0 && d.weekday() != 6) days.push_back(d);

    const RegimeProfile prof = profile(p.regime);
    Rng market_rng(derive_seed(p.seed, "market"));
    std::vector<double> market(static_cast<std::size_t>(p.n_days));
    for (auto& m : market) m = prof.market_drift + prof.market_vol * market_rng.normal();

    std::vector<Bar> bars;
    bars.reserve(static_cast<std::size_t>(p.n_stocks) * static_cast<std::size_t>(p.n_days));
    for (int i = 0; i < p.n_stocks; ++i) {
        const Board board = kAllBoards[i % 4];
        const std::string ticker = make_ticker(board, i / 4);
        Rng rng(derive_seed(p.seed, "stock", static_cast<std::uint64_t>(i)));
        const double sigma = prof.idio_vol_lo + (prof.idio_vol_hi - prof.idio_vol_lo) * rng.uniform();
        const double beta = 0.6 + 0.8 * rng.uniform();
        const double base_volume = std::exp(13.0 + 1.5 * rng.normal());
        const double lim = official_limit(board);
        double prev_close = tick(5.0 + 75.0 * rng.uniform());

        for (int t = 0; t < p.n_days; ++t) {
            const double total = beta * market[static_cast<std::size_t>(t)] + sigma * rng.normal() - 0.5 * sigma * sigma;
            const double overnight = 0.3 * total + 0.3 * sigma * rng.normal();
            const double intraday = total - overnight;
            const double up = tick(prev_close * (1.0 + lim));
            const double dn = tick(prev_close * (1.0 - lim));
            auto clamp = [&](double x) { return std::clamp(tick(x), dn, up); };

            const double open = clamp(prev_close * std::exp(overnight));
            const double close = clamp(open * std::exp(intraday));
            double high = clamp(std::max(open, close) * std::exp(0.5 * sigma * std::abs(rng.normal())));
            double low = clamp(std::min(open, close) * std::exp(-0.5 * sigma * std::abs(rng.normal())));
            high = std::max({high, open, close});
            low = std::min({low, open, close});

            const double volume = std::max(100.0, std::round(base_volume * std::exp(0.35 * rng.normal() + 8.0 * std::abs(total)) / 100.0) * 100.0);
            const double amount = std::round(volume * (open + high + low + close) / 4.0 * 100.0) / 100.0;
            bars.push_back(Bar{ticker, days[static_cast<std::size_t>(t)], DailyBar{open, high, low, close, volume, amount}});
            prev_close = close;
        }
    }
    return MarketStore(TradingCalendar(std::move(days)), std::move(bars));
}

}  // namespace blindtrade::data
