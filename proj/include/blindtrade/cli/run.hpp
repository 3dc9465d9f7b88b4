#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blindtrade/attribution/attribution.hpp"
#include "blindtrade/core/json.hpp"
#include "blindtrade/data/market_store.hpp"
#include "blindtrade/data/synth.hpp"
#include "blindtrade/harness/action.hpp"
#include "blindtrade/harness/config.hpp"
#include "blindtrade/masking/mask_level.hpp"

namespace blindtrade::cli {

namespace fs = std::filesystem;

/// Either a bar CSV (optionally with calendar and membership files) or synthetic parameters.
struct DataSpec {
    std::optional<std::string> csv;
    std::optional<std::string> calendar;
    std::optional<std::string> membership;
    std::optional<data::SynthParams> synth;

    Json to_json() const;
    /// Relative paths resolve against `base`.
    static DataSpec from_json(const Json& j, const fs::path& base = {});
};

data::MarketStore load_market(const DataSpec& spec);

struct WindowSpec {
    std::string name;
    Json start, end;  // ISO date or day index
};

struct AgentSpec {
    std::string name;
    std::string kind;  // built-in kind, or "external"
    Json params = Json::object();
    std::vector<std::string> command;
};

struct RunManifest {
    DataSpec data;
    harness::HarnessConfig config;
    std::vector<WindowSpec> windows;
    std::vector<harness::DecisionMode> modes;
    std::vector<masking::MaskLevel> levels;
    std::vector<std::uint64_t> seeds;
    std::vector<AgentSpec> agents;
    std::size_t workers = 1;
    fs::path output;
    bool attribution = false;
    attribution::AttributionConfig attribution_config;

    /// Unknown keys throw std::invalid_argument.
    static RunManifest from_json(const Json& j, const fs::path& base = {});
    static RunManifest load(const fs::path& path);
};

struct Cell {
    const AgentSpec* agent = nullptr;
    harness::DecisionMode mode{};
    masking::MaskLevel level{};
    std::string window;
    data::DayIndex start = 0, end = 0;
    std::uint64_t seed = 0;
    /// <agent>__<mode>__<level>__<window>__s<seed>
    std::string name() const;
};

std::pair<data::DayIndex, data::DayIndex> resolve_window(const WindowSpec& w, const data::TradingCalendar& cal);
std::vector<Cell> expand_grid(const RunManifest& m, const data::MarketStore& store);

/// Runs one cell into `dir`: episode files, metrics.json, optional attribution, then DONE.
void run_cell(const Cell& cell, const RunManifest& m, const data::MarketStore& store, const fs::path& dir);

struct RunReport {
    std::size_t completed = 0;
    std::size_t skipped = 0;
    std::vector<std::string> failed;
};

/// Executes the grid on a bounded worker pool; cells with a DONE marker are skipped.
/// Writes summary.json / summary.csv under the output root.
RunReport run_manifest(const RunManifest& m, std::ostream& log);

/// Linear-interpolation quantile; for an even count the median is the mean of the
/// two central values.
double quantile(std::vector<double> v, double q);

/// Median and IQR of each panel field over seeds, per (agent, mode, level, window).
Json summarize(const fs::path& root);

struct LeaderboardReport {
    std::vector<std::string> missing;  // cells without metrics
    Json leaderboard;
    Json attribution;
};

/// Leaderboard (rows sorted by median total return with the benchmark row at its rank)
/// and the attribution table (means per row, sorted by selection alpha). Writes
/// leaderboard.csv/json, attribution_table.csv and equity_<window>.csv into `out`.
LeaderboardReport report(const fs::path& root, const fs::path& out);

}  // namespace blindtrade::cli
