#include "blindtrade/attribution/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "blindtrade/core/error.hpp"

namespace blindtrade::attribution {

using data::DayIndex;
using data::StyleFactor;

namespace {

double median_of(std::vector<double> v) {
    const auto n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    const double hi = v[n / 2];
    if (n % 2) return hi;
    return (*std::max_element(v.begin(), v.begin() + n / 2) + hi) / 2.0;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::optional<std::vector<double>> preprocess_column(std::span<const std::optional<double>> raw, double mad_mult,
                                                     std::size_t min_obs) {
    std::vector<double> vals;
    for (const auto& v : raw)
        if (v && std::isfinite(*v)) vals.push_back(*v);
    if (vals.size() < min_obs || vals.size() < 2) return std::nullopt;

    const double med = median_of(vals);
    std::vector<double> dev;
    for (double v : vals) dev.push_back(std::abs(v - med));
    const double mad = median_of(dev);
    const double lo = med - mad_mult * mad, hi = med + mad_mult * mad;
    for (auto& v : vals) v = std::clamp(v, lo, hi);

    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    if (!(sd > 1e-14 * std::max(1.0, std::abs(mean)))) return std::nullopt;

    std::vector<double> out(raw.size(), 0.0);
    for (std::size_t i = 0; i < raw.size(); ++i)
        if (raw[i] && std::isfinite(*raw[i])) out[i] = (std::clamp(*raw[i], lo, hi) - mean) / sd;
    return out;
}

std::vector<double> wls_weights(const data::MarketStore& store, std::span<const data::TickerId> ids, DayIndex day,
                                std::size_t window) {
    std::vector<double> w;
    double total = 0.0;
    for (auto id : ids) {
        const auto days = store.bar_days(id);
        const auto n = store.bars_before(id, day);
        const auto m = std::min(n, window);
        double s = 0.0;
        for (std::size_t j = 1; j <= m; ++j) s += store.bar(id, days[n - j])->amount;
        const double v = m ? std::sqrt(s / static_cast<double>(m)) : 0.0;
        w.push_back(v);
        total += v;
    }
    if (total > 0)
        for (auto& v : w) v /= total;
    return w;
}

CrossSection build_cross_section(const data::MarketStore& store, DayIndex day, std::span<const StyleFactor> factors,
                                 const AttributionConfig& cfg) {
    CrossSection cs;
    cs.day = day;
    auto ids = store.investable(day);
    const auto w = wls_weights(store, ids, day, cfg.wls_window);
    std::vector<data::TickerId> kept;
    std::vector<double> kept_w;
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (w[i] > 0.0) {
            kept.push_back(ids[i]);
            kept_w.push_back(w[i]);
        }
    const auto n = kept.size();
    cs.r.resize(static_cast<Eigen::Index>(n));
    cs.weights.resize(static_cast<Eigen::Index>(n));
    std::vector<data::StyleExposureRow> rows;
    for (std::size_t i = 0; i < n; ++i) {
        cs.tickers.push_back(store.ticker(kept[i]));
        cs.r[static_cast<Eigen::Index>(i)] = *store.close_return(kept[i], day);
        cs.weights[static_cast<Eigen::Index>(i)] = kept_w[i];
        rows.push_back(data::style_row(store, kept[i], day));
    }
    std::vector<std::vector<double>> cols;
    for (auto f : factors) {
        std::vector<std::optional<double>> raw;
        for (const auto& row : rows) raw.push_back(row[f]);
        if (auto z = preprocess_column(raw, cfg.winsor_mad, cfg.min_obs)) {
            cols.push_back(std::move(*z));
            cs.factors.push_back(f);
        } else {
            cs.dropped.push_back(f);
        }
    }
    cs.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
        for (std::size_t i = 0; i < n; ++i) cs.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = cols[k][i];
    return cs;
}

FactorReturns fit_day(const Eigen::VectorXd& r, const Eigen::MatrixXd& X, const Eigen::VectorXd& weights) {
    const auto n = X.rows(), k = X.cols();
    if (r.size() != n || weights.size() != n) throw PreconditionError("cross-section sizes disagree");
    if (n <= k + 1)
        throw PreconditionError("cross-section has " + std::to_string(n) + " names for " + std::to_string(k) +
                                " factors plus intercept");
    if ((weights.array() <= 0.0).any()) throw PreconditionError("WLS weights must be positive");

    Eigen::MatrixXd A(n, k + 1);
    A.col(0).setOnes();
    A.rightCols(k) = X;
    const Eigen::VectorXd sw = weights.array().sqrt();
    const Eigen::MatrixXd Aw = sw.asDiagonal() * A;
    const Eigen::VectorXd bw = sw.asDiagonal() * r;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Aw);
    const Eigen::VectorXd beta = cod.solve(bw);

    FactorReturns out;
    out.f0 = beta[0];
    out.lambda = beta.tail(k);
    out.residuals = r - A * beta;
    out.rank = cod.rank();
    out.rank_deficient = out.rank < k + 1;
    const double dof = static_cast<double>(n - out.rank);
    const double s2 = (weights.array() * out.residuals.array().square()).sum() / dof;
    const Eigen::MatrixXd cov = cod.pseudoInverse() * cod.pseudoInverse().transpose() * s2;
    out.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

FactorReturns fit_day(const CrossSection& cs) { return fit_day(cs.r, cs.X, cs.weights); }

std::vector<double> vif(const Eigen::MatrixXd& X) {
    const auto n = X.rows(), k = X.cols();
    std::vector<double> out;
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd y = X.col(j);
        Eigen::MatrixXd A(n, k);
        A.col(0).setOnes();
        for (Eigen::Index c = 0, o = 1; c < k; ++c)
            if (c != j) A.col(o++) = X.col(c);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
        const Eigen::VectorXd res = y - A * cod.solve(y);
        const double sst = (y.array() - y.mean()).square().sum();
        const double ssr = res.squaredNorm();
        if (sst <= 0.0 || ssr <= sst / kVifCap) {
            out.push_back(kVifCap);
        } else {
            out.push_back(std::min(kVifCap, sst / ssr));
        }
    }
    return out;
}

std::vector<std::string> VifReport::kept() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
        if (e.kept) out.push_back(e.factor);
    return out;
}

Json VifReport::to_json() const {
    Json f = Json::array();
    for (const auto& e : entries) f.push_back({{"factor", e.factor}, {"vif", e.vif}, {"kept", e.kept}});
    return Json{{"calibration", calibration}, {"factors", f}};
}

VifReport vif_screen(const Eigen::MatrixXd& pooled, std::span<const std::string> names, double threshold) {
    if (static_cast<std::size_t>(pooled.cols()) != names.size()) throw PreconditionError("factor names do not match columns");
    std::vector<std::size_t> live(names.size());
    for (std::size_t i = 0; i < live.size(); ++i) live[i] = i;
    std::vector<VifEntry> entries(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) entries[i].factor = names[i];
    for (;;) {
        if (live.size() < 2) throw PreconditionError("VIF screening left fewer than two factors");
        Eigen::MatrixXd sub(pooled.rows(), static_cast<Eigen::Index>(live.size()));
        for (std::size_t c = 0; c < live.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = pooled.col(static_cast<Eigen::Index>(live[c]));
        const auto v = vif(sub);
        for (std::size_t c = 0; c < live.size(); ++c) entries[live[c]].vif = v[c];
        const auto worst = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
        if (v[worst] <= threshold) break;
        entries[live[worst]].kept = false;
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    VifReport rep;
    rep.entries = std::move(entries);
    return rep;
}

std::vector<StyleFactor> parse_factors(std::span<const std::string> names) {
    std::vector<StyleFactor> out;
    for (const auto& n : names) {
        const auto f = data::parse_factor(n);
        if (!f) throw PreconditionError("unknown style factor '" + n + "'");
        out.push_back(*f);
    }
    return out;
}

VifReport screen_factors(const data::MarketStore& store, DayIndex first, DayIndex last, DayIndex eval_start,
                         const AttributionConfig& cfg) {
    if (last >= eval_start) throw PreconditionError("calibration window must end before the evaluation window");
    if (first < 1 || first > last) throw PreconditionError("empty calibration window");
    std::vector<StyleFactor> all;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < data::kStyleFactorCount; ++k) {
        all.push_back(static_cast<StyleFactor>(k));
        names.emplace_back(data::kStyleFactorNames[k]);
    }
    std::vector<CrossSection> sections;
    std::set<StyleFactor> seen;
    Eigen::Index rows = 0;
    for (DayIndex d = first; d <= last; ++d) {
        sections.push_back(build_cross_section(store, d, all, cfg));
        rows += sections.back().X.rows();
        for (auto f : sections.back().factors) seen.insert(f);
    }
    // Factors never available in the window cannot be screened.
    std::vector<StyleFactor> usable(seen.begin(), seen.end());
    std::vector<std::string> usable_names;
    for (auto f : usable) usable_names.emplace_back(data::factor_name(f));
    Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(usable.size()));
    Eigen::Index at = 0;
    for (const auto& cs : sections) {
        for (std::size_t c = 0; c < cs.factors.size(); ++c) {
            const auto col = std::find(usable.begin(), usable.end(), cs.factors[c]) - usable.begin();
            pooled.block(at, col, cs.X.rows(), 1) = cs.X.col(static_cast<Eigen::Index>(c));
        }
        at += cs.X.rows();
    }
    auto rep = vif_screen(pooled, usable_names, cfg.vif_threshold);
    for (std::size_t k = 0; k < data::kStyleFactorCount; ++k)
        if (!seen.count(all[k])) rep.entries.push_back({names[k], 0.0, false});
    rep.calibration = store.calendar().at(first).iso() + ".." + store.calendar().at(last).iso();
    return rep;
}

AttributionResult attribute_episode(std::span<const execution::NavPoint> nav, const data::MarketStore& store,
                                    std::span<const StyleFactor> factors, const AttributionConfig& cfg) {
    AttributionResult res;
    const auto K = factors.size();
    for (auto f : factors) res.factors.emplace_back(data::factor_name(f));
    res.style.assign(K, 0.0);
    double compounded = 1.0;
    for (std::size_t t = 1; t < nav.size(); ++t) {
        const auto& prev = nav[t - 1];
        const auto& cur = nav[t];
        if (cur.day != prev.day + 1) throw PreconditionError("NAV series has a gap");
        DailyAttribution da;
        da.day = cur.day;
        da.style.assign(K, 0.0);
        da.nav_return = cur.nav.cny() / prev.nav.cny() - 1.0;
        const double nav_prev = prev.nav.cny();

        if (!prev.holdings.empty()) {
            const auto cs = build_cross_section(store, cur.day, factors, cfg);
            std::map<std::string, Eigen::Index> row;
            for (std::size_t i = 0; i < cs.tickers.size(); ++i) row[cs.tickers[i]] = static_cast<Eigen::Index>(i);
            for (auto f : cs.dropped) da.dropped_factors.emplace_back(data::factor_name(f));
            std::optional<FactorReturns> fr;
            if (cs.X.rows() > cs.X.cols() + 1) {
                fr = fit_day(cs);
                da.f0 = fr->f0;
                da.rank_deficient = fr->rank_deficient;
            } else {
                da.skipped = true;
            }
            double covered = 0.0;
            for (const auto& h : prev.holdings) {
                const double w = static_cast<double>(h.shares) * h.price / nav_prev;
                da.invested += w;
                const auto it = row.find(h.ticker);
                if (it == row.end() || !fr) {
                    const auto id = store.id_of(h.ticker);
                    const auto r = id ? store.close_return(*id, cur.day) : std::nullopt;
                    const double ri = r.value_or(0.0);
                    da.port += w * ri;
                    da.alpha += w * ri;
                    if (it == row.end()) da.uncovered.push_back(h.ticker);
                    continue;
                }
                const auto i = it->second;
                da.port += w * cs.r[i];
                covered += w;
                da.alpha += w * fr->residuals[i];
                for (std::size_t c = 0; c < cs.factors.size(); ++c) {
                    const auto k = static_cast<std::size_t>(std::find(factors.begin(), factors.end(), cs.factors[c]) - factors.begin());
                    da.style[k] += w * cs.X(i, static_cast<Eigen::Index>(c)) * fr->lambda[static_cast<Eigen::Index>(c)];
                }
            }
            da.common = da.f0 * covered;
        }
        da.cash_drag = -da.f0 * (1.0 - da.invested);

        res.common += da.common;
        for (std::size_t k = 0; k < K; ++k) res.style[k] += da.style[k];
        res.alpha += da.alpha;
        res.port += da.port;
        res.common_unit += da.f0;
        res.cash_drag += da.cash_drag;
        compounded *= 1.0 + da.port;
        res.days.push_back(std::move(da));
    }
    for (double s : res.style) res.style_total += s;
    res.port_compounded = compounded - 1.0;
    res.linking_residual = res.port_compounded - res.port;
    if (nav.size() >= 2) res.nav_return = nav.back().nav.cny() / nav.front().nav.cny() - 1.0;
    return res;
}

Json AttributionResult::to_json(const data::TradingCalendar& calendar) const {
    Json style_obj = Json::object();
    for (std::size_t k = 0; k < factors.size(); ++k) style_obj[factors[k]] = style[k];
    Json daily = Json::array();
    for (const auto& d : days) {
        Json s = Json::object();
        for (std::size_t k = 0; k < factors.size(); ++k) s[factors[k]] = d.style[k];
        daily.push_back({{"date", calendar.at(d.day).iso()},
                         {"common", d.common},
                         {"style", s},
                         {"alpha", d.alpha},
                         {"port", d.port},
                         {"invested", d.invested},
                         {"f0", d.f0},
                         {"cash_drag", d.cash_drag},
                         {"nav_return", d.nav_return},
                         {"skipped", d.skipped},
                         {"rank_deficient", d.rank_deficient},
                         {"uncovered", d.uncovered},
                         {"dropped_factors", d.dropped_factors}});
    }
    return Json{{"factors", factors},
                {"cumulative",
                 {{"common", common},
                  {"style", style_total},
                  {"style_by_factor", style_obj},
                  {"selection_alpha", alpha},
                  {"port", port},
                  {"port_compounded", port_compounded},
                  {"linking_residual", linking_residual},
                  {"common_unit", common_unit},
                  {"cash_drag", cash_drag},
                  {"nav_return", nav_return}}},
                {"daily", daily}};
}

std::string AttributionResult::daily_csv(const data::TradingCalendar& calendar) const {
    std::string out = "date,common";
    for (const auto& f : factors) out += "," + f;
    out += ",alpha,port\n";
    for (const auto& d : days) {
        out += calendar.at(d.day).iso() + "," + fmt(d.common);
        for (double s : d.style) out += "," + fmt(s);
        out += "," + fmt(d.alpha) + "," + fmt(d.port) + "\n";
    }
    return out;
}

CohortTable cohort_exposures(std::span<const CohortEpisode> episodes, const data::MarketStore& store,
                             std::span<const StyleFactor> factors, const AttributionConfig& cfg) {
    CohortTable table;
    const auto K = factors.size();
    std::vector<std::vector<double>> sums;
    std::map<DayIndex, CrossSection> cache;
    auto section = [&](DayIndex d) -> const CrossSection& {
        auto it = cache.find(d);
        if (it == cache.end()) it = cache.emplace(d, build_cross_section(store, d, factors, cfg)).first;
        return it->second;
    };
    for (const auto& ep : episodes) {
        auto c = static_cast<std::size_t>(std::find(table.cohorts.begin(), table.cohorts.end(), ep.cohort) - table.cohorts.begin());
        if (c == table.cohorts.size()) {
            table.cohorts.push_back(ep.cohort);
            table.members.push_back(0);
            table.excluded.push_back(0);
            sums.emplace_back(K, 0.0);
        }
        std::vector<double> acc(K, 0.0);
        std::size_t invested_days = 0;
        for (std::size_t t = 1; t < ep.nav.size(); ++t) {
            const auto& prev = ep.nav[t - 1];
            if (prev.holdings.empty()) continue;
            const auto& cs = section(ep.nav[t].day);
            std::map<std::string, Eigen::Index> row;
            for (std::size_t i = 0; i < cs.tickers.size(); ++i) row[cs.tickers[i]] = static_cast<Eigen::Index>(i);
            std::vector<double> e(K, 0.0);
            double wsum = 0.0;
            for (const auto& h : prev.holdings) {
                const auto it = row.find(h.ticker);
                if (it == row.end()) continue;
                const double w = static_cast<double>(h.shares) * h.price;
                wsum += w;
                for (std::size_t cc = 0; cc < cs.factors.size(); ++cc) {
                    const auto k = static_cast<std::size_t>(std::find(factors.begin(), factors.end(), cs.factors[cc]) - factors.begin());
                    e[k] += w * cs.X(it->second, static_cast<Eigen::Index>(cc));
                }
            }
            if (wsum <= 0.0) continue;
            for (std::size_t k = 0; k < K; ++k) acc[k] += e[k] / wsum;
            ++invested_days;
        }
        if (!invested_days) {
            ++table.excluded[c];
            continue;
        }
        ++table.members[c];
        for (std::size_t k = 0; k < K; ++k) sums[c][k] += acc[k] / static_cast<double>(invested_days);
    }
    for (std::size_t k = 0; k < K; ++k) {
        CohortRow row;
        row.factor = std::string(data::factor_name(factors[k]));
        for (std::size_t c = 0; c < table.cohorts.size(); ++c)
            row.means.push_back(table.members[c] ? sums[c][k] / static_cast<double>(table.members[c]) : 0.0);
        if (row.means.size() == 2) {
            row.gap = row.means[0] - row.means[1];
            row.flagged = std::abs(*row.gap) > kCohortGapFlag;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string CohortTable::csv() const {
    std::string out = "factor";
    for (const auto& c : cohorts) out += "," + c;
    out += ",gap,flag\n";
    for (const auto& r : rows) {
        out += r.factor;
        for (double m : r.means) out += "," + fmt(m);
        out += "," + (r.gap ? fmt(*r.gap) : std::string()) + "," + (r.flagged ? "1" : "0") + "\n";
    }
    return out;
}

Json CohortTable::to_json() const {
    Json rs = Json::array();
    for (const auto& r : rows)
        rs.push_back({{"factor", r.factor}, {"means", r.means}, {"gap", r.gap ? Json(*r.gap) : Json(nullptr)},
                      {"flagged", r.flagged}});
    return Json{{"cohorts", cohorts}, {"members", members}, {"excluded", excluded}, {"rows", rs}};
}

std::vector<execution::NavPoint> load_nav_points(const std::string& holdings_path, const data::TradingCalendar& calendar) {
    std::ifstream in(holdings_path);
    if (!in) throw DataError("cannot open " + holdings_path);
    std::vector<execution::NavPoint> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            const auto j = Json::parse(line);
            execution::NavPoint p;
            const auto day = calendar.index_of(Date::parse_iso(j.at("date").get<std::string>()));
            if (!day) throw DataError("date not in calendar", n);
            p.day = *day;
            p.nav = Money::from_cny(std::stod(j.at("nav").get<std::string>()));
            p.cash = Money::from_cny(std::stod(j.at("cash").get<std::string>()));
            for (const auto& h : j.at("holdings"))
                p.holdings.push_back({h.at("ticker").get<std::string>(), h.at("shares").get<std::int64_t>(),
                                      h.at("price").get<double>(), h.value("stale", false)});
            out.push_back(std::move(p));
        } catch (const Json::exception& e) {
            throw DataError(std::string("holdings.jsonl: ") + e.what(), n);
        }
    }
    return out;
}

}  // namespace blindtrade::attribution
