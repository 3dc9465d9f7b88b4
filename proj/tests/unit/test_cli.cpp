#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "blindtrade/cli/app.hpp"
#include "blindtrade/cli/run.hpp"
#include "blindtrade/harness/config.hpp"
#include "fixtures.hpp"

using namespace blindtrade;
using bt_test::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "blindtrade");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run_app(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json manifest(const std::string& output) {
    return Json{{"data", {{"synth", {{"seed", 7}, {"n_stocks", 30}, {"n_days", 330}}}}},
                {"windows", Json::array({Json{{"name", "W1"}, {"start", 300}, {"end", 311}},
                                         Json{{"name", "W2"}, {"start", 312}, {"end", 323}}})},
                {"modes", Json::array({"fixed_candidate"})},
                {"levels", Json::array({"blinded", "bright"})},
                {"seeds", Json::array({1, 2})},
                {"agents", Json::array({"cash", Json{{"name", "mom"}, {"kind", "momentum_topk"}, {"params", {{"k", 5}}}}})},
                {"workers", 3},
                {"output", output},
                {"attribution", true}};
}

}  // namespace

TEST(Quantile, LinearInterpolation) {
    EXPECT_EQ(cli::quantile({4, 1, 3, 2}, 0.5), 2.5);
    EXPECT_EQ(cli::quantile({4, 1, 3, 2}, 0.25), 1.75);
    EXPECT_EQ(cli::quantile({5, 1, 3}, 0.5), 3.0);
    EXPECT_EQ(cli::quantile({7}, 0.75), 7.0);
}

TEST(Cli, HelpListsConfigKeys) {
    const auto r = invoke({"--help"});
    EXPECT_EQ(r.code, 0);
    for (const auto& k : harness::config_keys()) EXPECT_NE(r.out.find(k.key), std::string::npos) << k.key;
}

TEST(Cli, BadInputsExitNonZero) {
    TempDir tmp("cli_bad");
    EXPECT_NE(invoke({"frobnicate"}).code, 0);
    auto m = manifest("out");
    m["colour"] = "blue";
    write(tmp / "m.json", m.dump());
    const auto r = invoke({"run", "--manifest", (tmp / "m.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("colour"), std::string::npos);
}

TEST(Cli, RunIsIdempotentAndDeterministic) {
    TempDir tmp("cli_run");
    write(tmp / "a.json", manifest("out_a").dump());
    write(tmp / "b.json", manifest("out_b").dump());
    auto r = invoke({"run", "--manifest", (tmp / "a.json").string()});
    ASSERT_EQ(r.code, 0) << r.err << r.out;
    std::size_t cells = 0;
    for (const auto& e : fs::directory_iterator(tmp / "out_a" / "cells")) {
        ++cells;
        EXPECT_TRUE(fs::exists(e.path() / "DONE")) << e.path();
        EXPECT_TRUE(fs::exists(e.path() / "metrics.json"));
        EXPECT_TRUE(fs::exists(e.path() / "attribution.json"));
    }
    EXPECT_EQ(cells, 16u);
    EXPECT_TRUE(fs::exists(tmp / "out_a" / "summary.json"));

    const auto before = fs::last_write_time(tmp / "out_a" / "cells" / "mom__fixed_candidate__blinded__W1__s1" / "nav.csv");
    const cli::RunManifest m = cli::RunManifest::load(tmp / "a.json");
    std::ostringstream log;
    const auto rep = cli::run_manifest(m, log);
    EXPECT_EQ(rep.completed, 0u);
    EXPECT_EQ(rep.skipped, 16u);
    EXPECT_EQ(before, fs::last_write_time(tmp / "out_a" / "cells" / "mom__fixed_candidate__blinded__W1__s1" / "nav.csv"));

    ASSERT_EQ(invoke({"run", "--manifest", (tmp / "b.json").string()}).code, 0);
    for (const auto& e : fs::recursive_directory_iterator(tmp / "out_a")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), tmp / "out_a");
        EXPECT_EQ(slurp(e.path()), slurp(tmp / "out_b" / rel)) << rel;
    }
}

TEST(Cli, ReportRanksRowsWithBenchmark) {
    TempDir tmp("cli_report");
    write(tmp / "m.json", manifest("out").dump());
    ASSERT_EQ(invoke({"run", "--manifest", (tmp / "m.json").string()}).code, 0);
    const auto r = invoke({"report", "--root", (tmp / "out").string(), "--out", (tmp / "rep").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lb = Json::parse(slurp(tmp / "rep" / "leaderboard.json"));
    const auto& rows = lb;
    ASSERT_EQ(rows.size(), 5u);  // 2 agents x 2 levels + benchmark
    int bench = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double ret = rows[i]["metrics"]["total_return"].get<double>();
        if (i) {
            EXPECT_GE(rows[i - 1]["metrics"]["total_return"].get<double>(), ret);
        }
        if (rows[i]["agent"] == "cash") {
            EXPECT_EQ(ret, 0.0);
        }
        EXPECT_EQ(rows[i]["rank"], i + 1);
        bench += rows[i]["benchmark"].get<bool>();
    }
    EXPECT_EQ(bench, 1);
    EXPECT_TRUE(fs::exists(tmp / "rep" / "attribution_table.csv"));
    EXPECT_TRUE(fs::exists(tmp / "rep" / "equity_W1.csv"));
}

TEST(Cli, MetricsAndAttributeOnEpisode) {
    TempDir tmp("cli_metrics");
    write(tmp / "m.json", manifest("out").dump());
    ASSERT_EQ(invoke({"run", "--manifest", (tmp / "m.json").string()}).code, 0);
    const auto cell = tmp / "out" / "cells" / "mom__fixed_candidate__blinded__W1__s1";
    auto r = invoke({"metrics", "--episode", cell.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out), Json::parse(slurp(cell / "metrics.json")));
    r = invoke({"attribute", "--episode", cell.string(), "--synth-seed", "7", "--synth-stocks", "30", "--synth-days", "330",
             "--out", (tmp / "attr").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(tmp / "attr" / "attribution.json"));
}

TEST(Cli, ProbeRoundTrip) {
    TempDir tmp("cli_probe");
    auto r = invoke({"probe-gen", "--synth-seed", "3", "--synth-stocks", "60", "--synth-days", "300", "--n", "40", "--seed", "2",
                  "--out", (tmp / "p").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(tmp / "p" / "gold.json"));
    write(tmp / "answers.jsonl", "{\"probe_id\": \"probe_0001\", \"ticker_top5\": [\"SH600000\"], "
                                 "\"date_guess\": \"2020-06-01\", \"board_guess\": \"MAIN\"}\nbroken\n");
    r = invoke({"probe-score", "--gold", (tmp / "p" / "gold.json").string(), "--answers", (tmp / "answers.jsonl").string(),
             "--synth-seed", "3", "--synth-stocks", "60", "--synth-days", "300"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto s = Json::parse(r.out);
    EXPECT_EQ(s["n_responses"], 1);
    EXPECT_EQ(s["rejected"], 1);
}
