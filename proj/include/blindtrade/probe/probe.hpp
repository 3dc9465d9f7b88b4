#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blindtrade/core/json.hpp"
#include "blindtrade/core/rng.hpp"
#include "blindtrade/data/market_store.hpp"
#include "blindtrade/masking/alias_map.hpp"

namespace blindtrade::probe {

inline constexpr double kWilsonZ = 1.959964;

struct StrataSpec {
    int windows = 5;
    /// Bars required before the probe day; the snapshot reads this many.
    int min_history = 21;
};

struct Gold {
    std::string ticker;
    data::DayIndex day = 0;
    data::Board board = data::Board::Main;
    int window = 0;  // 1-based
    std::uint64_t map_seed = 0;
};

struct Probe {
    std::string id;
    Json payload;  // masked; never contains the gold
    Gold gold;
};

/// Consecutive, near-equal spans of the eligible days [min_history, last day].
std::vector<std::pair<data::DayIndex, data::DayIndex>> probe_windows(const data::MarketStore& store,
                                                                     const StrataSpec& spec);

/// n probes spread over windows x boards as evenly as possible, sampled without
/// replacement per stratum. Each probe is masked BLINDED under its own alias map.
/// Throws PreconditionError naming any stratum without enough eligible (stock, day) pairs.
std::vector<Probe> generate_probes(const data::MarketStore& store, int n, const StrataSpec& spec, std::uint64_t seed);

/// The alias map a probe was rendered with; what a cheating attacker would be handed.
masking::AliasMap probe_alias_map(const data::MarketStore& store, const Gold& gold);

/// probes/<id>.json (payload only) and gold.json.
void write_probes(const std::vector<Probe>& probes, const data::TradingCalendar& calendar,
                  const std::filesystem::path& dir);
std::map<std::string, Gold> load_gold(const std::filesystem::path& gold_json, const data::TradingCalendar& calendar);

struct Answer {
    std::string probe_id;
    std::vector<std::string> ticker_top5;
    Date date_guess;
    std::string board_guess;
};

/// One answer per JSON line; lines that do not parse into an Answer are counted in
/// `rejected` and left out.
struct AnswerFile {
    std::vector<Answer> answers;
    std::size_t rejected = 0;
};
AnswerFile parse_answers(std::istream& in);
Json answer_json(const Answer& a);

struct Rate {
    std::size_t hits = 0;
    std::size_t n = 0;
    double rate() const { return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0; }
    double lo = 0.0, hi = 0.0;
};

std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n, double z = kWilsonZ);

struct ProbeScore {
    Rate tk1, tk5, board, date7, date30, date90, joint;
    std::size_t n_responses = 0;
    std::size_t rejected = 0;
    Json to_json() const;
};

struct Outcome {
    bool tk1 = false, tk5 = false, board = false;
    int date_distance = 0;  // trading days
};

Outcome score_answer(const Answer& answer, const Gold& gold, const data::TradingCalendar& calendar);

/// Throws PreconditionError for an answer naming an unknown probe id.
ProbeScore score_answers(const std::map<std::string, Gold>& gold, const std::vector<Answer>& answers,
                         const data::TradingCalendar& calendar);
ProbeScore score_outcomes(const std::vector<Outcome>& outcomes);

/// Five distinct tickers from the store universe, a day from the eligible span, and a
/// board, all uniform.
Answer uniform_answer(const std::string& probe_id, const data::MarketStore& store, const StrataSpec& spec, Rng& rng);

/// Monte Carlo of the uniform attacker against `gold`, n_trials answers per probe.
ProbeScore random_baseline(const data::MarketStore& store, const std::map<std::string, Gold>& gold,
                           const StrataSpec& spec, int n_trials, std::uint64_t seed);

}  // namespace blindtrade::probe
