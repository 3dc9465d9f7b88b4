#include <gtest/gtest.h>

#include <algorithm>

#include "blindtrade/attribution/attribution.hpp"
#include "blindtrade/core/error.hpp"
#include "blindtrade/data/synth.hpp"
#include "blindtrade/harness/agents.hpp"
#include "blindtrade/harness/episode.hpp"
#include "oracles.hpp"
#include "planted.hpp"

using namespace blindtrade;
using namespace blindtrade::attribution;
namespace oracle = bt_test::oracle;

namespace {

oracle::Matrix rows_of(const Eigen::MatrixXd& X) {
    oracle::Matrix m(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index c = 0; c < X.cols(); ++c) m[static_cast<std::size_t>(i)].push_back(X(i, c));
    return m;
}

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const data::MarketStore& market() {
    static const auto store = data::synth_market({.seed = 12, .n_stocks = 50, .n_days = 420});
    return store;
}

harness::Episode momentum_episode(data::DayIndex start, data::DayIndex end) {
    harness::EpisodeSpec s;
    s.mode = harness::DecisionMode::FixedCandidate;
    s.start = start;
    s.end = end;
    harness::InProcessEndpoint ep(harness::make_scripted_agent("momentum_topk", blindtrade::Json{{"k", 5}}, 1));
    return harness::run_episode(market(), s, ep);
}

std::vector<data::StyleFactor> all_factors() {
    std::vector<data::StyleFactor> f;
    for (std::size_t i = 0; i < data::kStyleFactorCount; ++i) f.push_back(static_cast<data::StyleFactor>(i));
    return f;
}

}  // namespace

TEST(Preprocess, ClipsStandardizesAndFillsMissing) {
    std::vector<std::optional<double>> raw;
    for (int i = 0; i < 19; ++i) raw.emplace_back(static_cast<double>(i % 7));
    raw.emplace_back(1000.0);
    raw.emplace_back(std::nullopt);
    const auto out = preprocess_column(raw, 5.0, 10);
    ASSERT_TRUE(out);

    std::vector<double> vals;
    for (const auto& v : raw)
        if (v) vals.push_back(*v);
    const double med = median(vals);
    std::vector<double> dev;
    for (double v : vals) dev.push_back(std::abs(v - med));
    const double mad = median(dev);
    for (double& v : vals) v = std::clamp(v, med - 5 * mad, med + 5 * mad);
    const double m = oracle::mean(vals), sd = *oracle::sample_std(vals);
    for (std::size_t i = 0; i < vals.size(); ++i) EXPECT_NEAR((*out)[i], (vals[i] - m) / sd, 1e-12);
    EXPECT_EQ(out->back(), 0.0);
}

TEST(Preprocess, RejectsThinOrFlatColumns) {
    std::vector<std::optional<double>> thin;
    for (int i = 0; i < 10; ++i) thin.emplace_back(0.1 * i);
    thin.resize(12, std::nullopt);
    EXPECT_TRUE(preprocess_column(thin, 5.0, 10).has_value());
    thin[9] = std::nullopt;
    EXPECT_FALSE(preprocess_column(thin, 5.0, 10).has_value());
    const std::vector<std::optional<double>> flat(20, 3.0);
    EXPECT_FALSE(preprocess_column(flat, 5.0, 10).has_value());
}

TEST(Wls, RecoversPlantedCoefficientsExactly) {
    std::mt19937_64 rng(5);
    const auto p = bt_test::planted(300, 6, 0.0, rng);
    const auto fit = fit_day(p.r, p.X, p.w);
    EXPECT_NEAR(fit.f0, p.f0, 1e-10);
    for (Eigen::Index c = 0; c < 6; ++c) EXPECT_NEAR(fit.lambda(c), p.lambda(c), 1e-10);
    EXPECT_LT(fit.residuals.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_FALSE(fit.rank_deficient);
}

TEST(Wls, MatchesNormalEquationOracle) {
    std::mt19937_64 rng(6);
    const auto p = bt_test::planted(120, 4, 0.02, rng);
    const auto fit = fit_day(p.r, p.X, p.w);
    const auto beta = oracle::wls(rows_of(p.X), vec(p.r), vec(p.w));
    EXPECT_NEAR(fit.f0, beta[0], 1e-12);
    for (Eigen::Index c = 0; c < 4; ++c) EXPECT_NEAR(fit.lambda(c), beta[static_cast<std::size_t>(c) + 1], 1e-12);

    // Standard errors: sqrt(diag((X'WX)^-1) * sum(w e^2) / (N - p)).
    const std::size_t n = 120, k = 5;
    oracle::Matrix A(k, std::vector<double>(k, 0.0));
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row{1.0};
        for (Eigen::Index c = 0; c < 4; ++c) row.push_back(p.X(static_cast<Eigen::Index>(i), c));
        double fitted = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            fitted += row[a] * beta[a];
            for (std::size_t b = 0; b < k; ++b) A[a][b] += p.w(static_cast<Eigen::Index>(i)) * row[a] * row[b];
        }
        const double e = p.r(static_cast<Eigen::Index>(i)) - fitted;
        sse += p.w(static_cast<Eigen::Index>(i)) * e * e;
    }
    const double s2 = sse / static_cast<double>(n - k);
    for (std::size_t a = 0; a < k; ++a) {
        std::vector<double> unit(k, 0.0);
        unit[a] = 1.0;
        const double inv_aa = oracle::solve(A, unit)[a];
        EXPECT_NEAR(fit.std_errors(static_cast<Eigen::Index>(a)), std::sqrt(inv_aa * s2), 1e-12);
    }
}

TEST(Wls, EqualWeightsGiveOls) {
    std::mt19937_64 rng(7);
    auto p = bt_test::planted(80, 3, 0.01, rng);
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(80, 1.0 / 80);
    const auto fit = fit_day(p.r, p.X, w);
    const auto beta = oracle::wls(rows_of(p.X), vec(p.r), std::vector<double>(80, 1.0));
    EXPECT_NEAR(fit.f0, beta[0], 1e-12);
    for (Eigen::Index c = 0; c < 3; ++c) EXPECT_NEAR(fit.lambda(c), beta[static_cast<std::size_t>(c) + 1], 1e-12);
}

TEST(Wls, InvariantToWeightScale) {
    std::mt19937_64 rng(8);
    auto p = bt_test::planted(90, 3, 0.01, rng);
    const auto a = fit_day(p.r, p.X, p.w);
    const auto b = fit_day(p.r, p.X, Eigen::VectorXd(p.w * 37.0));
    EXPECT_NEAR(a.f0, b.f0, 1e-13);
    EXPECT_LT((a.lambda - b.lambda).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((a.std_errors - b.std_errors).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Wls, RankDeficientAndUnderdetermined) {
    std::mt19937_64 rng(9);
    auto p = bt_test::planted(50, 2, 0.01, rng);
    Eigen::MatrixXd X(50, 3);
    X << p.X, p.X.col(0);
    const auto fit = fit_day(p.r, X, p.w);
    EXPECT_TRUE(fit.rank_deficient);
    EXPECT_EQ(fit.rank, 3);
    EXPECT_NEAR(fit.lambda(0), fit.lambda(2), 1e-10);
    EXPECT_THROW(fit_day(p.r.head(3), X.topRows(3), p.w.head(3)), PreconditionError);
    Eigen::VectorXd bad = p.w;
    bad(0) = 0.0;
    EXPECT_THROW(fit_day(p.r, p.X, bad), PreconditionError);
}

TEST(Vif, EquicorrelatedClosedForm) {
    const auto X = bt_test::equicorrelated(400, 3, 0.5, 1);
    for (double v : vif(X)) EXPECT_NEAR(v, 1.5, 1e-6);
}

TEST(Vif, MatchesOracleOnRandomData) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g;
    Eigen::MatrixXd X(200, 4);
    for (Eigen::Index i = 0; i < 200; ++i) {
        const double s = g(rng);
        for (Eigen::Index c = 0; c < 4; ++c) X(i, c) = g(rng) + 0.7 * c * s;
    }
    const auto got = vif(X);
    const auto rows = rows_of(X);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(got[j], oracle::vif(rows, j), 1e-9);
}

TEST(Vif, DuplicateFactorIsDropped) {
    Eigen::MatrixXd X(300, 4);
    X << bt_test::equicorrelated(300, 3, 0.2, 2), Eigen::VectorXd::Zero(300);
    X.col(3) = X.col(1);
    const std::vector<std::string> names{"A", "B", "C", "B2"};
    const auto rep = vif_screen(X, names, 5.0);
    ASSERT_EQ(rep.entries.size(), 4u);
    const auto kept = rep.kept();
    EXPECT_EQ(kept.size(), 3u);
    EXPECT_EQ(std::count(kept.begin(), kept.end(), "A"), 1);
    EXPECT_EQ(std::count(kept.begin(), kept.end(), "C"), 1);
    for (const auto& e : rep.entries)
        if (!e.kept) {
            EXPECT_GT(e.vif, 5.0);
        }
    Eigen::MatrixXd two(300, 2);
    two << X.col(1), X.col(1);
    EXPECT_THROW(vif_screen(two, std::vector<std::string>{"B", "B2"}, 5.0), PreconditionError);
}

TEST(Attribution, DailyIdentityOnMomentumEpisode) {
    const auto ep = momentum_episode(300, 359);
    const auto factors = all_factors();
    const auto res = attribute_episode(ep.nav, market(), factors, {});
    ASSERT_EQ(res.days.size(), 60u);
    double sum_common = 0, sum_alpha = 0, sum_port = 0;
    std::vector<double> sum_style(res.factors.size(), 0.0);
    for (const auto& d : res.days) {
        double s = 0.0;
        for (std::size_t k = 0; k < d.style.size(); ++k) {
            s += d.style[k];
            sum_style[k] += d.style[k];
        }
        EXPECT_LT(std::abs(d.common + s + d.alpha - d.port), 1e-10);
        sum_common += d.common;
        sum_alpha += d.alpha;
        sum_port += d.port;
    }
    EXPECT_NEAR(res.port, sum_port, 1e-12);
    EXPECT_NEAR(res.common, sum_common, 1e-12);
    EXPECT_NEAR(res.alpha, sum_alpha, 1e-12);
    EXPECT_LT(std::abs(res.common + res.style_total + res.alpha - res.port), 1e-10);
    for (std::size_t k = 0; k < sum_style.size(); ++k) EXPECT_NEAR(res.style[k], sum_style[k], 1e-12);
}

TEST(Attribution, PortMatchesHoldingsReturns) {
    const auto ep = momentum_episode(300, 309);
    const auto res = attribute_episode(ep.nav, market(), all_factors(), {});
    for (std::size_t t = 1; t < ep.nav.size(); ++t) {
        const auto& prev = ep.nav[t - 1];
        double port = 0.0;
        for (const auto& h : prev.holdings) {
            const auto id = *market().id_of(h.ticker);
            const auto r = market().close_return(id, ep.nav[t].day);
            if (r) port += static_cast<double>(h.shares) * h.price / prev.nav.cny() * *r;
        }
        EXPECT_NEAR(res.days[t - 1].port, port, 1e-12);
    }
}

TEST(Attribution, CashOnlyEpisodeIsZero) {
    std::vector<execution::NavPoint> nav;
    for (data::DayIndex d = 299; d <= 305; ++d) nav.push_back({d, Money::from_cny(1e6), Money::from_cny(1e6), {}});
    const auto res = attribute_episode(nav, market(), all_factors(), {});
    EXPECT_EQ(res.port, 0.0);
    EXPECT_EQ(res.alpha, 0.0);
    EXPECT_EQ(res.common, 0.0);
}

TEST(Attribution, ScreenRequiresCalibrationBeforeEvaluation) {
    EXPECT_THROW(screen_factors(market(), 260, 300, 300, {}), PreconditionError);
    const auto rep = screen_factors(market(), 260, 299, 300, {});
    EXPECT_EQ(rep.entries.size(), data::kStyleFactorCount);
    EXPECT_GE(rep.kept().size(), 2u);
}

TEST(Attribution, CohortTableFlagsLargeGaps) {
    const auto a = momentum_episode(300, 319);
    std::vector<execution::NavPoint> cash;
    for (data::DayIndex d = 299; d <= 319; ++d) cash.push_back({d, Money::from_cny(1e6), Money::from_cny(1e6), {}});
    const std::vector<CohortEpisode> eps{{"momentum", a.nav}, {"momentum", a.nav}, {"idle", cash}};
    const auto t = cohort_exposures(eps, market(), all_factors(), {});
    ASSERT_EQ(t.cohorts.size(), 2u);
    EXPECT_EQ(t.members[0], 2u);
    EXPECT_EQ(t.excluded[1], 1u);
    for (const auto& row : t.rows) {
        ASSERT_TRUE(row.gap);
        EXPECT_EQ(*row.gap, row.means[0] - row.means[1]);
        EXPECT_EQ(row.flagged, std::abs(*row.gap) > 0.4);
    }
    const auto& mom = *std::find_if(t.rows.begin(), t.rows.end(), [](const auto& r) { return r.factor == "MOM_12_1"; });
    EXPECT_GT(mom.means[0], 0.0);
}
