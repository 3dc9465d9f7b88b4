#include "blindtrade/cli/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <regex>
#include <set>
#include <thread>

#include "blindtrade/core/error.hpp"
#include "blindtrade/core/rng.hpp"
#include "blindtrade/harness/agents.hpp"
#include "blindtrade/harness/episode.hpp"
#include "blindtrade/metrics/panel.hpp"

namespace blindtrade::cli {

namespace {

std::string resolve(const std::string& p, const fs::path& base) {
    const fs::path path(p);
    return (path.is_absolute() || base.empty()) ? p : (base / path).string();
}

void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
            throw std::invalid_argument(where + ": unknown key '" + k + "'");
}

void check_name(const std::string& n, const std::string& what) {
    static const std::regex ok("[A-Za-z0-9_.-]+");
    if (!std::regex_match(n, ok)) throw std::invalid_argument(what + " name '" + n + "' must match [A-Za-z0-9_.-]+");
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) throw DataError("cannot write " + p.string());
}

Json read_json(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw DataError("cannot open " + p.string());
    return Json::parse(f);
}

std::string num(const Json& v) {
    if (v.is_null()) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
    return buf;
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    return out + "\n";
}

}  // namespace

Json DataSpec::to_json() const {
    if (synth)
        return Json{{"synth",
                     {{"seed", synth->seed},
                      {"n_stocks", synth->n_stocks},
                      {"n_days", synth->n_days},
                      {"regime", synth->regime == data::Regime::Bull     ? "bull"
                                 : synth->regime == data::Regime::Bear   ? "bear"
                                 : synth->regime == data::Regime::Sideways ? "sideways"
                                                                           : "default"},
                      {"first_day", synth->first_day.iso()}}}};
    Json j{{"csv", *csv}};
    if (calendar) j["calendar"] = *calendar;
    if (membership) j["membership"] = *membership;
    return j;
}

DataSpec DataSpec::from_json(const Json& j, const fs::path& base) {
    reject_unknown(j, {"csv", "calendar", "membership", "synth"}, "data");
    DataSpec d;
    if (j.contains("synth")) {
        if (j.contains("csv")) throw std::invalid_argument("data: give either csv or synth, not both");
        const auto& s = j["synth"];
        reject_unknown(s, {"seed", "n_stocks", "n_days", "regime", "first_day"}, "data.synth");
        data::SynthParams p;
        p.seed = s.value("seed", p.seed);
        p.n_stocks = s.value("n_stocks", p.n_stocks);
        p.n_days = s.value("n_days", p.n_days);
        p.regime = data::parse_regime(s.value("regime", std::string("default")));
        if (s.contains("first_day")) p.first_day = Date::parse_iso(s["first_day"].get<std::string>());
        d.synth = p;
        return d;
    }
    if (!j.contains("csv")) throw std::invalid_argument("data: needs csv or synth");
    d.csv = resolve(j["csv"].get<std::string>(), base);
    if (j.contains("calendar")) d.calendar = resolve(j["calendar"].get<std::string>(), base);
    if (j.contains("membership")) d.membership = resolve(j["membership"].get<std::string>(), base);
    return d;
}

data::MarketStore load_market(const DataSpec& spec) {
    if (spec.synth) return data::synth_market(*spec.synth);
    return data::ingest_csv(*spec.csv, spec.calendar, spec.membership);
}

RunManifest RunManifest::from_json(const Json& j, const fs::path& base) {
    reject_unknown(j,
                   {"data", "config", "windows", "modes", "levels", "seeds", "agents", "workers", "output", "attribution",
                    "attribution_config"},
                   "manifest");
    RunManifest m;
    if (!j.contains("data")) throw std::invalid_argument("manifest: missing data");
    m.data = DataSpec::from_json(j["data"], base);
    if (j.contains("config")) {
        const auto& c = j["config"];
        m.config = c.is_string() ? harness::HarnessConfig::load(resolve(c.get<std::string>(), base))
                                 : harness::HarnessConfig::from_json(c);
    }
    if (!j.contains("windows") || j["windows"].empty()) throw std::invalid_argument("manifest: windows must be non-empty");
    std::set<std::string> names;
    for (const auto& w : j["windows"]) {
        reject_unknown(w, {"name", "start", "end"}, "window");
        WindowSpec ws{w.at("name").get<std::string>(), w.at("start"), w.at("end")};
        check_name(ws.name, "window");
        if (!names.insert(ws.name).second) throw std::invalid_argument("duplicate window name '" + ws.name + "'");
        m.windows.push_back(ws);
    }
    for (const auto& s : j.value("modes", Json::array({"open_research"}))) m.modes.push_back(harness::parse_mode(s.get<std::string>()));
    for (const auto& s : j.value("levels", Json::array({"blinded"}))) m.levels.push_back(masking::parse_level(s.get<std::string>()));
    for (const auto& s : j.value("seeds", Json::array({0}))) m.seeds.push_back(s.get<std::uint64_t>());
    if (!j.contains("agents") || j["agents"].empty()) throw std::invalid_argument("manifest: agents must be non-empty");
    names.clear();
    for (const auto& a : j["agents"]) {
        AgentSpec s;
        if (a.is_string()) {
            s.name = s.kind = a.get<std::string>();
        } else {
            reject_unknown(a, {"name", "kind", "params", "command"}, "agent");
            s.kind = a.value("kind", a.contains("command") ? std::string("external") : std::string());
            s.name = a.value("name", s.kind);
            s.params = a.value("params", Json::object());
            if (a.contains("command")) s.command = a["command"].get<std::vector<std::string>>();
            if (s.kind == "external" && s.command.empty()) throw std::invalid_argument("external agent needs a command");
        }
        check_name(s.name, "agent");
        if (!names.insert(s.name).second) throw std::invalid_argument("duplicate agent name '" + s.name + "'");
        m.agents.push_back(std::move(s));
    }
    m.workers = std::max<std::size_t>(1, j.value("workers", std::size_t{1}));
    if (!j.contains("output")) throw std::invalid_argument("manifest: missing output");
    m.output = resolve(j["output"].get<std::string>(), base);
    m.attribution = j.value("attribution", false);
    if (j.contains("attribution_config")) {
        const auto& a = j["attribution_config"];
        reject_unknown(a, {"winsor_mad", "min_obs", "vif_threshold", "wls_window", "calibration_days"}, "attribution_config");
        auto& c = m.attribution_config;
        c.winsor_mad = a.value("winsor_mad", c.winsor_mad);
        c.min_obs = a.value("min_obs", c.min_obs);
        c.vif_threshold = a.value("vif_threshold", c.vif_threshold);
        c.wls_window = a.value("wls_window", c.wls_window);
        c.calibration_days = a.value("calibration_days", c.calibration_days);
    }
    return m;
}

RunManifest RunManifest::load(const fs::path& path) {
    return from_json(read_json(path), fs::absolute(path).parent_path());
}

std::string Cell::name() const {
    return agent->name + "__" + std::string(harness::mode_name(mode)) + "__" + std::string(masking::level_name(level)) +
           "__" + window + "__s" + std::to_string(seed);
}

std::pair<data::DayIndex, data::DayIndex> resolve_window(const WindowSpec& w, const data::TradingCalendar& cal) {
    auto day = [&](const Json& v, bool start) -> data::DayIndex {
        if (v.is_number_integer()) return v.get<data::DayIndex>();
        const auto d = Date::parse_iso(v.get<std::string>());
        const auto i = start ? cal.on_or_after(d) : cal.on_or_before(d);
        if (!i) throw PreconditionError("window " + w.name + ": " + d.iso() + " is outside the calendar");
        return *i;
    };
    const auto s = day(w.start, true), e = day(w.end, false);
    if (s < 1 || e < s || !cal.contains(e))
        throw PreconditionError("window " + w.name + " must satisfy 1 <= start <= end < calendar size");
    return {s, e};
}

std::vector<Cell> expand_grid(const RunManifest& m, const data::MarketStore& store) {
    std::vector<Cell> cells;
    for (const auto& a : m.agents)
        for (auto mode : m.modes)
            for (auto level : m.levels)
                for (const auto& w : m.windows) {
                    const auto [s, e] = resolve_window(w, store.calendar());
                    for (auto seed : m.seeds) cells.push_back({&a, mode, level, w.name, s, e, seed});
                }
    return cells;
}

void run_cell(const Cell& cell, const RunManifest& m, const data::MarketStore& store, const fs::path& dir) {
    harness::EpisodeSpec spec;
    spec.mode = cell.mode;
    spec.level = cell.level;
    spec.start = cell.start;
    spec.end = cell.end;
    spec.seed = cell.seed;
    spec.config = m.config;
    spec.agent = cell.agent->name;
    spec.window = cell.window;

    std::unique_ptr<harness::AgentEndpoint> endpoint;
    if (cell.agent->kind == "external") {
        endpoint = std::make_unique<harness::SubprocessEndpoint>(cell.agent->command);
    } else {
        endpoint = std::make_unique<harness::InProcessEndpoint>(
            harness::make_scripted_agent(cell.agent->kind, cell.agent->params, derive_seed(cell.seed, "agent:" + cell.agent->name),
                                         harness::make_episode_map(store, spec)));
    }
    const auto ep = harness::run_episode(store, spec, *endpoint);
    endpoint.reset();
    fs::create_directories(dir);
    harness::write_episode(ep, dir);
    write_file(dir / "cell.json", Json{{"agent", cell.agent->name},
                                       {"kind", cell.agent->kind},
                                       {"mode", harness::mode_name(cell.mode)},
                                       {"level", masking::level_name(cell.level)},
                                       {"window", cell.window},
                                       {"start", store.calendar().at(cell.start).iso()},
                                       {"end", store.calendar().at(cell.end).iso()},
                                       {"seed", cell.seed}}
                                      .dump(2) + "\n");
    const auto panel = metrics::compute_panel(metrics::load_series(dir));
    write_file(dir / "metrics.json", panel.to_json().dump(2) + "\n");

    if (m.attribution) {
        const auto& cfg = m.attribution_config;
        Json out;
        try {
            const auto last = cell.start - 1;
            const auto first = std::max<data::DayIndex>(1, last - static_cast<data::DayIndex>(cfg.calibration_days) + 1);
            const auto vif = attribution::screen_factors(store, first, last, cell.start, cfg);
            const auto kept = vif.kept();
            const auto factors = attribution::parse_factors(kept);
            const auto res = attribution::attribute_episode(ep.nav, store, factors, cfg);
            write_file(dir / "vif.json", vif.to_json().dump(2) + "\n");
            write_file(dir / "attribution.csv", res.daily_csv(store.calendar()));
            out = res.to_json(store.calendar());
        } catch (const PreconditionError& e) {
            out = Json{{"error", e.what()}};
        }
        write_file(dir / "attribution.json", out.dump(2) + "\n");
    }
    write_file(dir / "DONE", "");
}

RunReport run_manifest(const RunManifest& m, std::ostream& log) {
    const auto store = load_market(m.data);
    const auto cells = expand_grid(m, store);
    fs::create_directories(m.output / "cells");
    RunReport rep;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const auto& c = cells[i];
            const auto dir = m.output / "cells" / c.name();
            if (fs::exists(dir / "DONE")) {
                std::lock_guard lock(mu);
                ++rep.skipped;
                log << "skip " << c.name() << "\n";
                continue;
            }
            fs::remove_all(dir);
            try {
                run_cell(c, m, store, dir);
                std::lock_guard lock(mu);
                ++rep.completed;
                log << "done " << c.name() << "\n";
            } catch (const std::exception& e) {
                fs::create_directories(dir);
                write_file(dir / "FAILED", std::string(e.what()) + "\n");
                std::lock_guard lock(mu);
                rep.failed.push_back(c.name());
                log << "FAILED " << c.name() << ": " << e.what() << "\n";
            }
        }
    };
    const auto n = std::min(m.workers, std::max<std::size_t>(1, cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    std::sort(rep.failed.begin(), rep.failed.end());
    summarize(m.output);
    return rep;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw PreconditionError("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

struct CellResult {
    fs::path dir;
    Json cell;
    Json metrics;
};

std::vector<CellResult> collect(const fs::path& root, std::vector<std::string>* missing) {
    std::vector<fs::path> dirs;
    if (fs::exists(root / "cells"))
        for (const auto& e : fs::directory_iterator(root / "cells"))
            if (e.is_directory()) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    std::vector<CellResult> out;
    for (const auto& d : dirs) {
        if (!fs::exists(d / "DONE") || !fs::exists(d / "metrics.json")) {
            if (missing) missing->push_back(d.filename().string());
            continue;
        }
        out.push_back({d, read_json(d / "cell.json"), read_json(d / "metrics.json")});
    }
    return out;
}

Json field_stats(const std::vector<const Json*>& panels, const std::string& field) {
    std::vector<double> v;
    for (const auto* p : panels)
        if (!(*p)[field].is_null()) v.push_back((*p)[field].get<double>());
    if (v.empty()) return Json{{"median", nullptr}, {"q1", nullptr}, {"q3", nullptr}};
    return Json{{"median", quantile(v, 0.5)}, {"q1", quantile(v, 0.25)}, {"q3", quantile(v, 0.75)}};
}

}  // namespace

Json summarize(const fs::path& root) {
    std::vector<std::string> failed;
    const auto cells = collect(root, &failed);
    std::map<std::vector<std::string>, std::vector<const Json*>> groups;
    for (const auto& c : cells)
        groups[{c.cell["agent"].get<std::string>(), c.cell["mode"].get<std::string>(), c.cell["level"].get<std::string>(),
                c.cell["window"].get<std::string>()}]
            .push_back(&c.metrics);
    const auto fields = metrics::panel_fields();
    Json gs = Json::array();
    std::vector<std::string> header{"agent", "mode", "level", "window", "n"};
    for (const auto& f : fields) {
        header.push_back(f + "_median");
        if (f == "total_return") {
            header.push_back("total_return_q1");
            header.push_back("total_return_q3");
        }
    }
    std::string csv = csv_line(header);
    for (const auto& [key, panels] : groups) {
        Json g{{"agent", key[0]}, {"mode", key[1]}, {"level", key[2]}, {"window", key[3]}, {"n", panels.size()}};
        std::vector<std::string> row{key[0], key[1], key[2], key[3], std::to_string(panels.size())};
        Json stats = Json::object();
        for (const auto& f : fields) {
            stats[f] = field_stats(panels, f);
            row.push_back(num(stats[f]["median"]));
            if (f == "total_return") {
                row.push_back(num(stats[f]["q1"]));
                row.push_back(num(stats[f]["q3"]));
            }
        }
        g["metrics"] = stats;
        gs.push_back(g);
        csv += csv_line(row);
    }
    Json out{{"groups", gs}, {"incomplete", failed}};
    write_file(root / "summary.json", out.dump(2) + "\n");
    write_file(root / "summary.csv", csv);
    return out;
}

LeaderboardReport report(const fs::path& root, const fs::path& out_dir) {
    LeaderboardReport rep;
    const auto cells = collect(root, &rep.missing);
    fs::create_directories(out_dir);
    const auto fields = metrics::panel_fields();

    std::map<std::vector<std::string>, std::vector<const CellResult*>> groups;
    std::map<std::string, double> bench_by_window;
    for (const auto& c : cells) {
        groups[{c.cell["agent"].get<std::string>(), c.cell["mode"].get<std::string>(), c.cell["level"].get<std::string>()}]
            .push_back(&c);
        bench_by_window.emplace(c.cell["window"].get<std::string>(), c.metrics["benchmark_return"].get<double>());
    }

    struct Row {
        std::string agent, mode, level;
        std::size_t n = 0;
        Json medians = Json::object();
        double total = 0.0;
        bool benchmark = false;
    };
    std::vector<Row> rows;
    for (const auto& [key, members] : groups) {
        Row r{key[0], key[1], key[2], members.size()};
        std::vector<const Json*> panels;
        for (const auto* c : members) panels.push_back(&c->metrics);
        for (const auto& f : fields) r.medians[f] = field_stats(panels, f)["median"];
        r.total = r.medians["total_return"].get<double>();
        rows.push_back(std::move(r));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.total > b.total; });
    if (!bench_by_window.empty()) {
        std::vector<double> b;
        for (const auto& [w, v] : bench_by_window) b.push_back(v);
        Row br{"benchmark", "-", "-", b.size()};
        br.benchmark = true;
        br.total = quantile(b, 0.5);
        for (const auto& f : fields) br.medians[f] = nullptr;
        br.medians["total_return"] = br.total;
        br.medians["benchmark_return"] = br.total;
        br.medians["excess_return"] = 0.0;
        br.medians["annualized_turnover"] = 0.0;
        br.medians["turnover_after_entry"] = 0.0;
        // Ties rank the benchmark after the agents that match it.
        const auto at = std::find_if(rows.begin(), rows.end(), [&](const Row& r) { return r.total < br.total; });
        rows.insert(at, br);
    }

    Json lb = Json::array();
    std::vector<std::string> header{"rank", "agent", "mode", "level", "n"};
    for (const auto& f : fields) header.push_back(f);
    std::string csv = csv_line(header);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        lb.push_back({{"rank", i + 1}, {"agent", r.agent}, {"mode", r.mode}, {"level", r.level}, {"n", r.n},
                      {"benchmark", r.benchmark}, {"metrics", r.medians}});
        std::vector<std::string> line{std::to_string(i + 1), r.agent, r.mode, r.level, std::to_string(r.n)};
        for (const auto& f : fields) line.push_back(num(r.medians[f]));
        csv += csv_line(line);
    }
    write_file(out_dir / "leaderboard.csv", csv);
    write_file(out_dir / "leaderboard.json", lb.dump(2) + "\n");
    rep.leaderboard = lb;

    struct AttrRow {
        std::string agent, mode, level;
        std::size_t n = 0;
        double common = 0, style = 0, alpha = 0, port = 0;
    };
    std::vector<AttrRow> arows;
    for (const auto& [key, members] : groups) {
        AttrRow a{key[0], key[1], key[2]};
        for (const auto* c : members) {
            if (!fs::exists(c->dir / "attribution.json")) continue;
            const auto j = read_json(c->dir / "attribution.json");
            if (!j.contains("cumulative")) continue;
            const auto& cu = j["cumulative"];
            a.common += cu["common"].get<double>();
            a.style += cu["style"].get<double>();
            a.alpha += cu["selection_alpha"].get<double>();
            a.port += cu["port"].get<double>();
            ++a.n;
        }
        if (!a.n) continue;
        const double n = static_cast<double>(a.n);
        a.common /= n;
        a.style /= n;
        a.alpha /= n;
        a.port /= n;
        arows.push_back(a);
    }
    std::stable_sort(arows.begin(), arows.end(), [](const AttrRow& a, const AttrRow& b) { return a.alpha > b.alpha; });
    std::string acsv = "agent,mode,level,n,common,style,selection_alpha,port\n";
    Json aj = Json::array();
    for (const auto& a : arows) {
        acsv += csv_line({a.agent, a.mode, a.level, std::to_string(a.n), num(a.common), num(a.style), num(a.alpha), num(a.port)});
        aj.push_back({{"agent", a.agent}, {"mode", a.mode}, {"level", a.level}, {"n", a.n}, {"common", a.common},
                      {"style", a.style}, {"selection_alpha", a.alpha}, {"port", a.port}});
    }
    if (!arows.empty()) write_file(out_dir / "attribution_table.csv", acsv);
    rep.attribution = aj;

    std::map<std::string, std::vector<const CellResult*>> by_window;
    for (const auto& c : cells) by_window[c.cell["window"].get<std::string>()].push_back(&c);
    for (const auto& [w, members] : by_window) {
        std::vector<std::vector<std::string>> cols;  // per cell: dates..., navs...
        std::vector<std::string> dates, bench;
        std::vector<std::string> header{"date"};
        for (const auto* c : members) {
            std::ifstream f(c->dir / "nav.csv");
            std::string line;
            std::getline(f, line);
            std::vector<std::string> navs;
            std::vector<std::string> ds, bs;
            while (std::getline(f, line)) {
                std::vector<std::string> parts;
                std::size_t pos = 0, q;
                while ((q = line.find(',', pos)) != std::string::npos) {
                    parts.push_back(line.substr(pos, q - pos));
                    pos = q + 1;
                }
                parts.push_back(line.substr(pos));
                if (parts.size() != 4) continue;
                ds.push_back(parts[0]);
                navs.push_back(parts[1]);
                bs.push_back(parts[3]);
            }
            if (dates.empty()) {
                dates = ds;
                bench = bs;
            }
            if (ds != dates) continue;
            const auto name = c->dir.filename().string();
            header.push_back(name);
            cols.push_back(std::move(navs));
        }
        header.push_back("benchmark");
        std::string ecsv = csv_line(header);
        for (std::size_t i = 0; i < dates.size(); ++i) {
            std::vector<std::string> line{dates[i]};
            for (const auto& col : cols) line.push_back(col[i]);
            line.push_back(bench[i]);
            ecsv += csv_line(line);
        }
        write_file(out_dir / ("equity_" + w + ".csv"), ecsv);
    }
    return rep;
}

}  // namespace blindtrade::cli
