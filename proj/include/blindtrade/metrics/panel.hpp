#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blindtrade/core/json.hpp"

namespace blindtrade::harness {
struct Episode;
}

namespace blindtrade::metrics {

inline constexpr double kTradingDaysPerYear = 252.0;

struct CalibrationPoint {
    double confidence = 0.0;
    bool correct = false;
};

/// What the panel is computed from. `nav` and `benchmark` run from the initial
/// point through the last step (T + 1 values); per-step vectors hold T values.
struct EpisodeSeries {
    std::vector<double> nav;
    std::vector<double> benchmark;
    std::vector<double> turnover;    // sum |w_post - w_pre| at fill prices
    std::vector<double> hhi;         // sum of squared holding weights at the close
    std::vector<double> cash_ratio;  // cash / NAV at the close
    std::vector<bool> abstained;
    std::vector<bool> parse_failed;
    std::size_t tool_calls_total = 0;
    std::size_t tool_calls_valid = 0;
    std::vector<CalibrationPoint> calibration;
};

/// Undefined quantities (zero-variance ratios, rates over empty sets) are nullopt
/// and serialize as null.
struct MetricPanel {
    std::size_t steps = 0;
    double total_return = 0.0;
    double benchmark_return = 0.0;
    double excess_return = 0.0;
    std::optional<double> sharpe;
    double max_drawdown = 0.0;
    std::optional<double> information_ratio;
    double annualized_turnover = 0.0;
    /// Same scaling, excluding the first step with any trade.
    double turnover_after_entry = 0.0;
    double hhi = 0.0;
    double cash_ratio = 0.0;
    double abstention_rate = 0.0;
    double parse_failure_rate = 0.0;
    std::optional<double> ece;
    std::optional<double> tool_validity_rate;
    std::optional<double> brier;
    std::size_t orders_scored = 0;

    Json to_json() const;
    static MetricPanel from_json(const Json& j);
};

/// Field order shared by the CSV writers.
std::vector<std::string> panel_fields();
std::vector<std::string> panel_csv_values(const MetricPanel& p);

MetricPanel compute_panel(const EpisodeSeries& s);

std::vector<double> daily_returns(std::span<const double> nav);
double max_drawdown(std::span<const double> nav);
std::optional<double> sharpe(std::span<const double> returns);
std::optional<double> expected_calibration_error(std::span<const CalibrationPoint> points, std::size_t bins = 10);
std::optional<double> brier_score(std::span<const CalibrationPoint> points);

/// A BUY is correct when the next-period return is positive, a SELL when it is negative.
CalibrationPoint calibration_point(bool buy, double confidence, double next_return);

EpisodeSeries series_of(const harness::Episode& episode);
/// Reads nav.csv, holdings.jsonl, steps.jsonl and orders.jsonl from an episode directory.
EpisodeSeries load_series(const std::filesystem::path& dir);

}  // namespace blindtrade::metrics
