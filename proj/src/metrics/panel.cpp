#include "blindtrade/metrics/panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "blindtrade/core/error.hpp"
#include "blindtrade/core/stats.hpp"
#include "blindtrade/harness/episode.hpp"

namespace blindtrade::metrics {

std::vector<double> daily_returns(std::span<const double> nav) {
    std::vector<double> r;
    for (std::size_t t = 1; t < nav.size(); ++t) r.push_back(nav[t] / nav[t - 1] - 1.0);
    return r;
}

double max_drawdown(std::span<const double> nav) {
    double peak = 0.0, mdd = 0.0;
    for (double v : nav) {
        peak = std::max(peak, v);
        if (peak > 0) mdd = std::min(mdd, v / peak - 1.0);
    }
    return mdd;
}

std::optional<double> sharpe(std::span<const double> returns) {
    const auto sd = stats::sample_std(returns);
    if (!sd || *sd <= 0.0) return std::nullopt;
    return stats::mean(returns) / *sd * std::sqrt(kTradingDaysPerYear);
}

std::optional<double> expected_calibration_error(std::span<const CalibrationPoint> points, std::size_t bins) {
    if (points.empty() || bins == 0) return std::nullopt;
    std::vector<double> conf(bins, 0.0), hits(bins, 0.0), count(bins, 0.0);
    for (const auto& p : points) {
        auto b = static_cast<std::size_t>(std::floor(p.confidence * static_cast<double>(bins)));
        b = std::min(b, bins - 1);
        conf[b] += p.confidence;
        hits[b] += p.correct ? 1.0 : 0.0;
        count[b] += 1.0;
    }
    double e = 0.0;
    const double n = static_cast<double>(points.size());
    for (std::size_t b = 0; b < bins; ++b)
        if (count[b] > 0) e += count[b] / n * std::abs(conf[b] / count[b] - hits[b] / count[b]);
    return e;
}

std::optional<double> brier_score(std::span<const CalibrationPoint> points) {
    if (points.empty()) return std::nullopt;
    double s = 0.0;
    for (const auto& p : points) {
        const double o = p.correct ? 1.0 : 0.0;
        s += (p.confidence - o) * (p.confidence - o);
    }
    return s / static_cast<double>(points.size());
}

CalibrationPoint calibration_point(bool buy, double confidence, double next_return) {
    return {confidence, buy ? next_return > 0.0 : next_return < 0.0};
}

MetricPanel compute_panel(const EpisodeSeries& s) {
    if (s.nav.size() < 2 || s.benchmark.size() != s.nav.size())
        throw PreconditionError("panel needs aligned NAV and benchmark series with at least one step");
    const std::size_t T = s.nav.size() - 1;
    auto per_step = [&](std::size_t n, const char* what) {
        if (n != T) throw PreconditionError(std::string("per-step series '") + what + "' does not match the step count");
    };
    per_step(s.turnover.size(), "turnover");
    per_step(s.hhi.size(), "hhi");
    per_step(s.cash_ratio.size(), "cash_ratio");
    per_step(s.abstained.size(), "abstained");
    per_step(s.parse_failed.size(), "parse_failed");

    MetricPanel p;
    p.steps = T;
    p.total_return = s.nav.back() / s.nav.front() - 1.0;
    p.benchmark_return = s.benchmark.back() / s.benchmark.front() - 1.0;
    p.excess_return = p.total_return - p.benchmark_return;

    const auto r = daily_returns(s.nav);
    const auto b = daily_returns(s.benchmark);
    p.sharpe = sharpe(r);
    p.max_drawdown = max_drawdown(s.nav);
    std::vector<double> excess(T);
    for (std::size_t t = 0; t < T; ++t) excess[t] = r[t] - b[t];
    p.information_ratio = sharpe(excess);  // annualized mean / annualized std reduces to the same ratio

    const double scale = kTradingDaysPerYear / static_cast<double>(T);
    double turn = 0.0, after = 0.0;
    bool entered = false;
    for (std::size_t t = 0; t < T; ++t) {
        turn += s.turnover[t];
        if (entered) after += s.turnover[t];
        if (s.turnover[t] > 0.0) entered = true;
    }
    p.annualized_turnover = turn * scale;
    p.turnover_after_entry = after * scale;

    p.hhi = stats::mean(s.hhi);
    p.cash_ratio = stats::mean(s.cash_ratio);
    p.abstention_rate = static_cast<double>(std::count(s.abstained.begin(), s.abstained.end(), true)) / static_cast<double>(T);
    p.parse_failure_rate =
        static_cast<double>(std::count(s.parse_failed.begin(), s.parse_failed.end(), true)) / static_cast<double>(T);
    p.ece = expected_calibration_error(s.calibration);
    p.brier = brier_score(s.calibration);
    p.orders_scored = s.calibration.size();
    if (s.tool_calls_total)
        p.tool_validity_rate = static_cast<double>(s.tool_calls_valid) / static_cast<double>(s.tool_calls_total);
    return p;
}

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
std::optional<double> opt_of(const Json& j, const char* k) {
    if (!j.contains(k) || j[k].is_null()) return std::nullopt;
    return j[k].get<double>();
}

}  // namespace

Json MetricPanel::to_json() const {
    return Json{{"steps", steps},
                {"total_return", total_return},
                {"benchmark_return", benchmark_return},
                {"excess_return", excess_return},
                {"sharpe", opt(sharpe)},
                {"max_drawdown", max_drawdown},
                {"information_ratio", opt(information_ratio)},
                {"annualized_turnover", annualized_turnover},
                {"turnover_after_entry", turnover_after_entry},
                {"hhi", hhi},
                {"cash_ratio", cash_ratio},
                {"abstention_rate", abstention_rate},
                {"parse_failure_rate", parse_failure_rate},
                {"ece", opt(ece)},
                {"tool_validity_rate", opt(tool_validity_rate)},
                {"brier", opt(brier)},
                {"orders_scored", orders_scored}};
}

MetricPanel MetricPanel::from_json(const Json& j) {
    MetricPanel p;
    p.steps = j.at("steps").get<std::size_t>();
    p.total_return = j.at("total_return").get<double>();
    p.benchmark_return = j.at("benchmark_return").get<double>();
    p.excess_return = j.at("excess_return").get<double>();
    p.sharpe = opt_of(j, "sharpe");
    p.max_drawdown = j.at("max_drawdown").get<double>();
    p.information_ratio = opt_of(j, "information_ratio");
    p.annualized_turnover = j.at("annualized_turnover").get<double>();
    p.turnover_after_entry = j.at("turnover_after_entry").get<double>();
    p.hhi = j.at("hhi").get<double>();
    p.cash_ratio = j.at("cash_ratio").get<double>();
    p.abstention_rate = j.at("abstention_rate").get<double>();
    p.parse_failure_rate = j.at("parse_failure_rate").get<double>();
    p.ece = opt_of(j, "ece");
    p.tool_validity_rate = opt_of(j, "tool_validity_rate");
    p.brier = opt_of(j, "brier");
    p.orders_scored = j.at("orders_scored").get<std::size_t>();
    return p;
}

std::vector<std::string> panel_fields() {
    std::vector<std::string> out;
    const Json j = MetricPanel{}.to_json();
    for (const auto& [k, v] : j.items()) out.push_back(k);
    return out;
}

std::vector<std::string> panel_csv_values(const MetricPanel& p) {
    std::vector<std::string> out;
    const Json j = p.to_json();
    for (const auto& [k, v] : j.items()) {
        if (v.is_null()) {
            out.emplace_back();
        } else if (v.is_number_float()) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
            out.emplace_back(buf);
        } else {
            out.push_back(v.dump());
        }
    }
    return out;
}

namespace {

double holdings_hhi(const std::vector<execution::Holding>& h, double nav) {
    double s = 0.0;
    for (const auto& x : h) {
        const double w = static_cast<double>(x.shares) * x.price / nav;
        s += w * w;
    }
    return s;
}

std::vector<Json> read_jsonl(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open " + p.string());
    std::vector<Json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const Json::parse_error& e) {
            throw DataError(p.filename().string() + ": " + e.what(), n);
        }
    }
    return out;
}

double money_field(const Json& j) { return j.is_string() ? std::stod(j.get<std::string>()) : j.get<double>(); }

}  // namespace

EpisodeSeries series_of(const harness::Episode& ep) {
    EpisodeSeries s;
    for (std::size_t i = 0; i < ep.nav.size(); ++i) {
        s.nav.push_back(ep.nav[i].nav.cny());
        s.benchmark.push_back(ep.benchmark_nav[i]);
    }
    for (const auto& st : ep.steps) {
        const double nav = st.mark.nav.cny();
        s.turnover.push_back(st.result.turnover);
        s.hhi.push_back(holdings_hhi(st.mark.holdings, nav));
        s.cash_ratio.push_back(st.mark.cash.cny() / nav);
        s.abstained.push_back(st.abstained());
        s.parse_failed.push_back(st.parse_failure());
        for (const auto& c : st.tool_calls) {
            ++s.tool_calls_total;
            s.tool_calls_valid += c.ok;
        }
    }
    for (const auto& o : ep.outcomes)
        if (o.next_return)
            s.calibration.push_back(calibration_point(o.side == execution::Side::Buy, o.confidence, *o.next_return));
    return s;
}

EpisodeSeries load_series(const std::filesystem::path& dir) {
    EpisodeSeries s;
    {
        std::ifstream in(dir / "nav.csv");
        if (!in) throw DataError("cannot open " + (dir / "nav.csv").string());
        std::string line;
        std::getline(in, line);
        if (line != "date,nav,cash,benchmark") throw DataError("nav.csv: unexpected header", 1);
        std::size_t n = 1;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string date, nav, cash, bench;
            if (!std::getline(ss, date, ',') || !std::getline(ss, nav, ',') || !std::getline(ss, cash, ',') ||
                !std::getline(ss, bench))
                throw DataError("nav.csv: expected 4 columns", n);
            s.nav.push_back(std::stod(nav));
            s.benchmark.push_back(std::stod(bench));
        }
    }
    const auto holdings = read_jsonl(dir / "holdings.jsonl");
    for (std::size_t i = 1; i < holdings.size(); ++i) {
        const auto& h = holdings[i];
        const double nav = money_field(h["nav"]);
        double hhi = 0.0;
        for (const auto& x : h["holdings"]) {
            const double w = x["shares"].get<double>() * x["price"].get<double>() / nav;
            hhi += w * w;
        }
        s.hhi.push_back(hhi);
        s.cash_ratio.push_back(money_field(h["cash"]) / nav);
    }
    for (const auto& st : read_jsonl(dir / "steps.jsonl")) {
        s.turnover.push_back(st["turnover"].get<double>());
        s.abstained.push_back(st["abstained"].get<bool>());
        s.parse_failed.push_back(st["parse_failure"].get<bool>());
        s.tool_calls_total += st["tool_calls_total"].get<std::size_t>();
        s.tool_calls_valid += st["tool_calls_valid"].get<std::size_t>();
    }
    for (const auto& o : read_jsonl(dir / "orders.jsonl"))
        if (!o["next_return"].is_null())
            s.calibration.push_back(
                calibration_point(o["side"] == "BUY", o["confidence"].get<double>(), o["next_return"].get<double>()));
    return s;
}

}  // namespace blindtrade::metrics
