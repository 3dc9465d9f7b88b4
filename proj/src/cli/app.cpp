#include "blindtrade/cli/app.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "blindtrade/attribution/attribution.hpp"
#include "blindtrade/cli/run.hpp"
#include "blindtrade/core/error.hpp"
#include "blindtrade/harness/agents.hpp"
#include "blindtrade/harness/endpoint.hpp"
#include "blindtrade/metrics/panel.hpp"
#include "blindtrade/probe/probe.hpp"

namespace blindtrade::cli {

namespace {

struct DataFlags {
    std::string csv, calendar, membership, spec;
    std::optional<std::uint64_t> synth_seed;
    int stocks = 50, days = 400;
    std::string regime = "default";

    void add(CLI::App* app) {
        app->add_option("--data", csv, "bar CSV: ticker,date,open,high,low,close,volume,amount");
        app->add_option("--calendar", calendar, "trading calendar (one ISO date per line)");
        app->add_option("--membership", membership, "index membership CSV: ticker,in_date,out_date");
        app->add_option("--data-spec", spec, "JSON data spec ({\"csv\": ...} or {\"synth\": {...}})");
        app->add_option("--synth-seed", synth_seed, "use a synthetic market with this seed");
        app->add_option("--synth-stocks", stocks, "synthetic universe size")->capture_default_str();
        app->add_option("--synth-days", days, "synthetic calendar length")->capture_default_str();
        app->add_option("--regime", regime, "synthetic regime: default, bull, bear, sideways")->capture_default_str();
    }

    DataSpec data_spec() const {
        if (!spec.empty()) {
            std::ifstream f(spec);
            if (!f) throw DataError("cannot open " + spec);
            return DataSpec::from_json(Json::parse(f), std::filesystem::absolute(spec).parent_path());
        }
        DataSpec d;
        if (synth_seed) {
            data::SynthParams p;
            p.seed = *synth_seed;
            p.n_stocks = stocks;
            p.n_days = days;
            p.regime = data::parse_regime(regime);
            d.synth = p;
            return d;
        }
        if (csv.empty()) throw std::invalid_argument("give --data, --data-spec or --synth-seed");
        d.csv = csv;
        if (!calendar.empty()) d.calendar = calendar;
        if (!membership.empty()) d.membership = membership;
        return d;
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw DataError("cannot write " + path);
}

std::string config_footer() {
    std::ostringstream s;
    s << "Harness config keys (JSON groups execution / agent / llm):\n";
    for (const auto& k : harness::config_keys()) s << "  " << k.key << " = " << k.default_value << "  " << k.description << "\n";
    return s.str();
}

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Leakage-controlled backtesting and audit toolkit for trading agents"};
    app.footer(config_footer());
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a bar CSV and write it back normalized");
    DataFlags ingest_data;
    ingest_data.add(ingest);
    std::string ingest_out;
    ingest->add_option("--out", ingest_out, "normalized CSV output");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic market CSV");
    data::SynthParams sp;
    std::string synth_regime = "default", synth_first, synth_out;
    synth->add_option("--seed", sp.seed)->capture_default_str();
    synth->add_option("--stocks", sp.n_stocks)->capture_default_str();
    synth->add_option("--days", sp.n_days)->capture_default_str();
    synth->add_option("--regime", synth_regime)->capture_default_str();
    synth->add_option("--first-day", synth_first, "ISO date of the first bar");
    synth->add_option("--out", synth_out)->required();

    // run
    auto* run = app.add_subcommand("run", "execute a run manifest grid");
    std::string manifest_path;
    run->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);

    // metrics
    auto* met = app.add_subcommand("metrics", "compute the metric panel of an episode directory");
    std::string met_dir, met_out;
    met->add_option("--episode", met_dir)->required()->check(CLI::ExistingDirectory);
    met->add_option("--out", met_out, "write the panel JSON here instead of stdout");

    // attribute
    auto* attr = app.add_subcommand("attribute", "return attribution of an episode, or cohort exposures");
    DataFlags attr_data;
    attr_data.add(attr);
    std::string attr_dir, attr_out;
    std::vector<std::string> attr_factors, cohorts;
    attribution::AttributionConfig acfg;
    attr->add_option("--episode", attr_dir, "episode directory");
    attr->add_option("--cohort", cohorts, "episode_dir=label, repeatable; emits the cohort exposure table");
    attr->add_option("--factors", attr_factors, "style factors to use; default: VIF-screened on the calibration window");
    attr->add_option("--calibration-days", acfg.calibration_days)->capture_default_str();
    attr->add_option("--vif-threshold", acfg.vif_threshold)->capture_default_str();
    attr->add_option("--winsor-mad", acfg.winsor_mad)->capture_default_str();
    attr->add_option("--out", attr_out, "output directory")->required();

    // report
    auto* rep = app.add_subcommand("report", "leaderboard and attribution tables over a run root");
    std::string rep_root, rep_out;
    rep->add_option("--root", rep_root)->required()->check(CLI::ExistingDirectory);
    rep->add_option("--out", rep_out)->required();

    // probes
    auto* pgen = app.add_subcommand("probe-gen", "generate masked de-anonymization probes");
    DataFlags pgen_data;
    pgen_data.add(pgen);
    int pn = 200;
    probe::StrataSpec strata;
    std::uint64_t pseed = 0;
    std::string pgen_out;
    pgen->add_option("--n", pn)->capture_default_str();
    pgen->add_option("--windows", strata.windows)->capture_default_str();
    pgen->add_option("--seed", pseed)->capture_default_str();
    pgen->add_option("--out", pgen_out)->required();

    auto* pscore = app.add_subcommand("probe-score", "score an attacker answers.jsonl against gold.json");
    DataFlags pscore_data;
    pscore_data.add(pscore);
    std::string gold_path, answers_path, pscore_out;
    pscore->add_option("--gold", gold_path)->required()->check(CLI::ExistingFile);
    pscore->add_option("--answers", answers_path)->required()->check(CLI::ExistingFile);
    pscore->add_option("--out", pscore_out, "write the score JSON here instead of stdout");

    auto* pbase = app.add_subcommand("probe-baseline", "Monte Carlo uniform-attacker baseline");
    DataFlags pbase_data;
    pbase_data.add(pbase);
    std::string pbase_gold, pbase_out;
    int trials = 100;
    std::uint64_t bseed = 0;
    pbase->add_option("--gold", pbase_gold)->required()->check(CLI::ExistingFile);
    pbase->add_option("--trials", trials)->capture_default_str();
    pbase->add_option("--seed", bseed)->capture_default_str();
    pbase->add_option("--windows", strata.windows)->capture_default_str();
    pbase->add_option("--out", pbase_out);

    // serve
    auto* serve = app.add_subcommand("serve-agent-stdio", "serve a built-in agent over stdin/stdout");
    std::string agent_kind = "cash", agent_params = "{}";
    std::uint64_t agent_seed = 0;
    serve->add_option("--agent", agent_kind, "cash, random, momentum_topk or buy_and_hold")->capture_default_str();
    serve->add_option("--params", agent_params, "agent parameters as JSON")->capture_default_str();
    serve->add_option("--seed", agent_seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*ingest) {
            const auto store = load_market(ingest_data.data_spec());
            std::size_t bars = 0;
            for (std::size_t i = 0; i < store.ticker_count(); ++i) bars += store.bar_days(i).size();
            out << Json{{"tickers", store.ticker_count()},
                        {"trading_days", store.calendar().size()},
                        {"bars", bars},
                        {"first_day", store.calendar().at(0).iso()},
                        {"last_day", store.calendar().at(static_cast<int>(store.calendar().size()) - 1).iso()}}
                       .dump(2)
                << "\n";
            if (!ingest_out.empty()) data::write_csv(store, ingest_out);
            return 0;
        }
        if (*synth) {
            sp.regime = data::parse_regime(synth_regime);
            if (!synth_first.empty()) sp.first_day = Date::parse_iso(synth_first);
            data::write_csv(data::synth_market(sp), synth_out);
            return 0;
        }
        if (*run) {
            const auto m = RunManifest::load(manifest_path);
            const auto r = run_manifest(m, err);
            out << Json{{"completed", r.completed}, {"skipped", r.skipped}, {"failed", r.failed}}.dump(2) << "\n";
            return r.failed.empty() ? 0 : 1;
        }
        if (*met) {
            const auto panel = metrics::compute_panel(metrics::load_series(met_dir)).to_json().dump(2) + "\n";
            if (met_out.empty())
                out << panel;
            else
                write_text(met_out, panel);
            return 0;
        }
        if (*attr) {
            const auto store = load_market(attr_data.data_spec());
            std::filesystem::create_directories(attr_out);
            auto nav_of = [&](const std::string& dir) {
                return attribution::load_nav_points((std::filesystem::path(dir) / "holdings.jsonl").string(), store.calendar());
            };
            auto factors_for = [&](data::DayIndex start) {
                if (!attr_factors.empty()) return attribution::parse_factors(attr_factors);
                const auto last = start - 1;
                const auto first = std::max<data::DayIndex>(1, last - static_cast<data::DayIndex>(acfg.calibration_days) + 1);
                const auto vif = attribution::screen_factors(store, first, last, start, acfg);
                write_text((std::filesystem::path(attr_out) / "vif.json").string(), vif.to_json().dump(2) + "\n");
                return attribution::parse_factors(vif.kept());
            };
            if (!cohorts.empty()) {
                std::vector<attribution::CohortEpisode> eps;
                for (const auto& c : cohorts) {
                    const auto eq = c.rfind('=');
                    if (eq == std::string::npos) throw std::invalid_argument("--cohort expects dir=label");
                    eps.push_back({c.substr(eq + 1), nav_of(c.substr(0, eq))});
                }
                if (eps.front().nav.size() < 2) throw PreconditionError("cohort episode has no steps");
                const auto factors = factors_for(eps.front().nav[1].day);
                const auto table = attribution::cohort_exposures(eps, store, factors, acfg);
                write_text((std::filesystem::path(attr_out) / "cohort_exposures.csv").string(), table.csv());
                write_text((std::filesystem::path(attr_out) / "cohort_exposures.json").string(), table.to_json().dump(2) + "\n");
                out << table.csv();
                return 0;
            }
            if (attr_dir.empty()) throw std::invalid_argument("give --episode or --cohort");
            const auto nav = nav_of(attr_dir);
            if (nav.size() < 2) throw PreconditionError("episode has no steps");
            const auto res = attribution::attribute_episode(nav, store, factors_for(nav[1].day), acfg);
            write_text((std::filesystem::path(attr_out) / "attribution.json").string(), res.to_json(store.calendar()).dump(2) + "\n");
            write_text((std::filesystem::path(attr_out) / "attribution.csv").string(), res.daily_csv(store.calendar()));
            out << res.to_json(store.calendar())["cumulative"].dump(2) << "\n";
            return 0;
        }
        if (*rep) {
            const auto r = report(rep_root, rep_out);
            out << r.leaderboard.dump(2) << "\n";
            for (const auto& m : r.missing) err << "missing panel: " << m << "\n";
            return r.missing.empty() ? 0 : 1;
        }
        if (*pgen) {
            const auto store = load_market(pgen_data.data_spec());
            const auto probes = probe::generate_probes(store, pn, strata, pseed);
            probe::write_probes(probes, store.calendar(), pgen_out);
            out << Json{{"probes", probes.size()}, {"out", pgen_out}}.dump() << "\n";
            return 0;
        }
        if (*pscore) {
            const auto store = load_market(pscore_data.data_spec());
            const auto gold = probe::load_gold(gold_path, store.calendar());
            std::ifstream in(answers_path);
            const auto answers = probe::parse_answers(in);
            auto score = probe::score_answers(gold, answers.answers, store.calendar());
            score.rejected = answers.rejected;
            const auto text = score.to_json().dump(2) + "\n";
            if (pscore_out.empty())
                out << text;
            else
                write_text(pscore_out, text);
            return 0;
        }
        if (*pbase) {
            const auto store = load_market(pbase_data.data_spec());
            const auto gold = probe::load_gold(pbase_gold, store.calendar());
            const auto text = probe::random_baseline(store, gold, strata, trials, bseed).to_json().dump(2) + "\n";
            if (pbase_out.empty())
                out << text;
            else
                write_text(pbase_out, text);
            return 0;
        }
        if (*serve) {
            auto agent = harness::make_scripted_agent(agent_kind, Json::parse(agent_params), agent_seed);
            harness::serve_stream(*agent, std::cin, out);
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace blindtrade::cli
