#pragma once

#include <cmath>
#include <random>

#include "blindtrade/metrics/panel.hpp"
#include "oracles.hpp"

namespace bt_test {

/// Brute-force panel: every field recomputed from the raw series with the oracle helpers.
inline blindtrade::metrics::MetricPanel panel_oracle(const blindtrade::metrics::EpisodeSeries& s) {
    namespace o = oracle;
    blindtrade::metrics::MetricPanel p;
    const std::size_t T = s.nav.size() - 1;
    p.steps = T;
    p.total_return = s.nav[T] / s.nav[0] - 1.0;
    p.benchmark_return = s.benchmark[T] / s.benchmark[0] - 1.0;
    p.excess_return = p.total_return - p.benchmark_return;
    std::vector<double> r, x;
    for (std::size_t t = 1; t <= T; ++t) {
        r.push_back(s.nav[t] / s.nav[t - 1] - 1.0);
        x.push_back(r.back() - (s.benchmark[t] / s.benchmark[t - 1] - 1.0));
    }
    auto ratio = [](const std::vector<double>& v) -> std::optional<double> {
        const auto sd = o::sample_std(v);
        if (!sd || *sd == 0.0) return std::nullopt;
        return o::mean(v) / *sd * std::sqrt(252.0);
    };
    p.sharpe = ratio(r);
    p.information_ratio = ratio(x);
    p.max_drawdown = o::max_drawdown(s.nav);
    std::size_t entry = T;
    for (std::size_t t = 0; t < T && entry == T; ++t)
        if (s.turnover[t] > 0.0) entry = t;
    double all = 0.0, after = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        all += s.turnover[t];
        if (t > entry) after += s.turnover[t];
    }
    p.annualized_turnover = all * 252.0 / static_cast<double>(T);
    p.turnover_after_entry = after * 252.0 / static_cast<double>(T);
    p.hhi = o::mean(s.hhi);
    p.cash_ratio = o::mean(s.cash_ratio);
    double ab = 0, pf = 0;
    for (std::size_t t = 0; t < T; ++t) {
        ab += s.abstained[t];
        pf += s.parse_failed[t];
    }
    p.abstention_rate = ab / static_cast<double>(T);
    p.parse_failure_rate = pf / static_cast<double>(T);
    std::vector<o::Point> pts;
    for (const auto& c : s.calibration) pts.push_back({c.confidence, c.correct});
    p.ece = o::ece(pts);
    p.brier = o::brier(pts);
    p.orders_scored = pts.size();
    if (s.tool_calls_total)
        p.tool_validity_rate = static_cast<double>(s.tool_calls_valid) / static_cast<double>(s.tool_calls_total);
    return p;
}

/// A random NAV/order fixture; some fixtures are flat, some start with idle steps.
inline blindtrade::metrics::EpisodeSeries random_series(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 0.015);
    blindtrade::metrics::EpisodeSeries s;
    const std::size_t T = 5 + rng() % 120;
    const bool flat = seed % 7 == 0;
    const std::size_t idle = rng() % 6;
    s.nav.push_back(1e6);
    s.benchmark.push_back(1e6);
    for (std::size_t t = 0; t < T; ++t) {
        s.nav.push_back(flat ? 1e6 : s.nav.back() * (1.0 + n(rng)));
        s.benchmark.push_back(s.benchmark.back() * (1.0 + n(rng)));
        s.turnover.push_back(t < idle || u(rng) < 0.3 ? 0.0 : u(rng) * 2.0);
        s.hhi.push_back(u(rng));
        s.cash_ratio.push_back(u(rng));
        s.abstained.push_back(u(rng) < 0.3);
        s.parse_failed.push_back(u(rng) < 0.1);
    }
    s.tool_calls_total = seed % 5 == 0 ? 0 : rng() % 50 + 1;
    s.tool_calls_valid = s.tool_calls_total ? rng() % (s.tool_calls_total + 1) : 0;
    const std::size_t k = seed % 11 == 0 ? 0 : rng() % 200;
    static const double edges[] = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    for (std::size_t i = 0; i < k; ++i) {
        const double c = u(rng) < 0.2 ? edges[rng() % 7] : u(rng);
        s.calibration.push_back({c, u(rng) < c});
    }
    return s;
}

}  // namespace bt_test
