#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blindtrade/core/json.hpp"
#include "blindtrade/data/market_store.hpp"
#include "blindtrade/data/style_factors.hpp"
#include "blindtrade/execution/account.hpp"

namespace blindtrade::attribution {

struct AttributionConfig {
    double winsor_mad = 5.0;
    std::size_t min_obs = 10;
    double vif_threshold = 5.0;
    std::size_t wls_window = 20;
    std::size_t calibration_days = 60;
};

inline constexpr double kVifCap = 1e6;

/// Clips at median +/- k*MAD, then z-scores over the non-missing values; missing
/// entries become 0. nullopt when fewer than `min_obs` values exist or the clipped
/// column has zero spread.
std::optional<std::vector<double>> preprocess_column(std::span<const std::optional<double>> raw, double mad_mult,
                                                     std::size_t min_obs);

struct CrossSection {
    data::DayIndex day = 0;
    std::vector<std::string> tickers;
    Eigen::VectorXd r;
    Eigen::MatrixXd X;
    Eigen::VectorXd weights;
    std::vector<data::StyleFactor> factors;  // columns of X
    std::vector<data::StyleFactor> dropped;  // requested but unusable on this day
};

/// Investable names at `day` with close-to-close returns and exposures from bars before `day`.
/// Names with no positive traded amount in the weight window are left out.
CrossSection build_cross_section(const data::MarketStore& store, data::DayIndex day,
                                 std::span<const data::StyleFactor> factors, const AttributionConfig& cfg);

/// sqrt of the mean amount over the last `window` bars before `day`, normalized to sum 1.
std::vector<double> wls_weights(const data::MarketStore& store, std::span<const data::TickerId> ids, data::DayIndex day,
                                std::size_t window);

struct FactorReturns {
    double f0 = 0.0;
    Eigen::VectorXd lambda;
    Eigen::VectorXd residuals;
    /// Conventional WLS standard errors of (f0, lambda...).
    Eigen::VectorXd std_errors;
    Eigen::Index rank = 0;
    bool rank_deficient = false;
};

/// WLS of r on [1 | X]; rank deficiency yields the minimum-norm solution. Throws
/// PreconditionError when N <= K + 1.
FactorReturns fit_day(const Eigen::VectorXd& r, const Eigen::MatrixXd& X, const Eigen::VectorXd& weights);
FactorReturns fit_day(const CrossSection& cs);

struct VifEntry {
    std::string factor;
    double vif = 1.0;  // at the time it was dropped, or final for kept factors
    bool kept = true;
};

struct VifReport {
    std::vector<VifEntry> entries;
    std::string calibration;  // window id
    std::vector<std::string> kept() const;
    Json to_json() const;
};

/// VIF of each column regressed (with intercept) on the others, capped at kVifCap.
std::vector<double> vif(const Eigen::MatrixXd& X);
/// Iteratively drops the largest VIF above `threshold`. Throws PreconditionError when
/// fewer than two factors survive.
VifReport vif_screen(const Eigen::MatrixXd& pooled, std::span<const std::string> names, double threshold);

/// Pools standardized exposures over [first, last] (factors dropped on a day enter as 0)
/// and screens them. `last` must precede `eval_start`.
VifReport screen_factors(const data::MarketStore& store, data::DayIndex first, data::DayIndex last,
                         data::DayIndex eval_start, const AttributionConfig& cfg);

std::vector<data::StyleFactor> parse_factors(std::span<const std::string> names);

struct DailyAttribution {
    data::DayIndex day = 0;
    double port = 0.0;    // sum_i w_i r_i over the invested sleeve
    double common = 0.0;  // f0 * sum of covered weights
    std::vector<double> style;
    double alpha = 0.0;
    double invested = 0.0;  // sum of pre-return weights
    double f0 = 0.0;
    double cash_drag = 0.0;   // -f0 * (1 - invested)
    double nav_return = 0.0;  // realized NAV return, trading effects included
    bool skipped = false;     // regression not identified; alpha carries the whole sleeve
    bool rank_deficient = false;
    std::vector<std::string> uncovered;  // held names outside the day's cross-section
    std::vector<std::string> dropped_factors;
};

struct AttributionResult {
    std::vector<std::string> factors;
    std::vector<DailyAttribution> days;
    double common = 0.0;
    std::vector<double> style;
    double style_total = 0.0;
    double alpha = 0.0;
    double port = 0.0;
    double port_compounded = 0.0;
    double linking_residual = 0.0;  // compounded minus summed Port
    double common_unit = 0.0;       // sum of f0, the fully invested convention
    double cash_drag = 0.0;
    double nav_return = 0.0;

    Json to_json(const data::TradingCalendar& calendar) const;
    std::string daily_csv(const data::TradingCalendar& calendar) const;
};

/// `nav` is the close-marked series including the initial point; day t is attributed
/// with the holdings and NAV at close t-1.
AttributionResult attribute_episode(std::span<const execution::NavPoint> nav, const data::MarketStore& store,
                                    std::span<const data::StyleFactor> factors, const AttributionConfig& cfg);

struct CohortEpisode {
    std::string cohort;
    std::vector<execution::NavPoint> nav;
};

struct CohortRow {
    std::string factor;
    std::vector<double> means;  // one per cohort, in `cohorts` order
    std::optional<double> gap;  // first minus second when exactly two cohorts
    bool flagged = false;       // |gap| > 0.4
};

struct CohortTable {
    std::vector<std::string> cohorts;
    std::vector<std::size_t> members;  // episodes contributing per cohort
    std::vector<std::size_t> excluded; // episodes without an invested day
    std::vector<CohortRow> rows;
    std::string csv() const;
    Json to_json() const;
};

inline constexpr double kCohortGapFlag = 0.4;

/// Exposure of the invested sleeve (weights renormalized over covered holdings),
/// averaged over invested days per episode, then over episodes per cohort.
CohortTable cohort_exposures(std::span<const CohortEpisode> episodes, const data::MarketStore& store,
                             std::span<const data::StyleFactor> factors, const AttributionConfig& cfg);

/// Reads holdings.jsonl back into NavPoints.
std::vector<execution::NavPoint> load_nav_points(const std::string& holdings_path, const data::TradingCalendar& calendar);

}  // namespace blindtrade::attribution
