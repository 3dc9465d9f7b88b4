#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "blindtrade/core/json.hpp"
#include "blindtrade/core/rng.hpp"
#include "blindtrade/harness/endpoint.hpp"
#include "blindtrade/masking/alias_map.hpp"

namespace blindtrade::harness {

/// Client side of the protocol shared by the built-in agents.
///
/// In open-research the agent may run its research and then submit unprompted;
/// in the tool-less modes it submits only when demanded. Every submission_demand
/// is answered with a fresh decision.
class ScriptedAgent : public Responder {
public:
    std::vector<Json> on_message(const Json& message) override;

protected:
    /// Optional research call issued on each user message in open-research.
    virtual std::optional<Json> research_call(const Json& data) const;
    /// The action object for the current step; `research` holds the tool payload, if any.
    virtual Json decide(const Json& data, const Json* research) = 0;

    std::string mode_ = "open_research";

private:
    Json submit();
    Json data_;
    std::optional<Json> research_;
    int call_seq_ = 0;
};

/// Always submits an empty order list.
class CashAgent : public ScriptedAgent {
protected:
    Json decide(const Json& data, const Json* research) override;
};

/// Each step picks k names uniformly (from the candidate pool in fixed-candidate mode),
/// sells held names outside the pick, and buys new picks at 1/k with random confidence.
class RandomAgent : public ScriptedAgent {
public:
    RandomAgent(std::uint64_t seed, std::size_t k) : rng_(seed), k_(k) {}

protected:
    Json decide(const Json& data, const Json* research) override;

private:
    Rng rng_;
    std::size_t k_;
};

/// Ranks by ret_20d (screen_candidates top 100 in open-research, the candidate table in
/// fixed-candidate), keeps names with vol_20d at or below the median, and holds the
/// top k at 1/k. Abstains when it sees no features.
class MomentumTopKAgent : public ScriptedAgent {
public:
    explicit MomentumTopKAgent(std::size_t k, double confidence = 0.6) : k_(k), confidence_(confidence) {}

protected:
    std::optional<Json> research_call(const Json& data) const override;
    Json decide(const Json& data, const Json* research) override;

private:
    std::size_t k_;
    double confidence_;
};

/// Buys up to k names (the whole visible universe when k is 0) at equal weight less a
/// 1% cash buffer on the first step it holds nothing, then never trades again.
class BuyAndHoldAgent : public ScriptedAgent {
public:
    explicit BuyAndHoldAgent(std::size_t k = 0) : k_(k) {}

protected:
    Json decide(const Json& data, const Json* research) override;

private:
    std::size_t k_;
    bool entered_ = false;
};

/// date (ISO) -> real ticker -> score.
using ScoreTable = std::map<std::string, std::map<std::string, double>>;

/// Reads `date,ticker,score` with a header row.
ScoreTable load_scores(const std::string& path);

/// Replays externally computed scores through the equal-weight top-k constructor.
/// Holds the episode's alias map to translate between what it sees and the score file.
class ScoreFileAgent : public ScriptedAgent {
public:
    ScoreFileAgent(ScoreTable scores, std::shared_ptr<const masking::AliasMap> map, std::size_t k = 20,
                   double threshold = 0.06)
        : scores_(std::move(scores)), map_(std::move(map)), k_(k), threshold_(threshold) {}

protected:
    Json decide(const Json& data, const Json* research) override;

private:
    ScoreTable scores_;
    std::shared_ptr<const masking::AliasMap> map_;
    std::size_t k_;
    double threshold_;
};

/// kind: cash | random {k, seed} | momentum_topk {k, confidence} | buy_and_hold {k} |
/// score_file {path, k, threshold}.
/// `episode_seed` seeds the random agent unless params carry their own seed; `map` is
/// required for score_file only.
std::unique_ptr<Responder> make_scripted_agent(const std::string& kind, const Json& params, std::uint64_t episode_seed,
                                               std::shared_ptr<const masking::AliasMap> map = nullptr);

}  // namespace blindtrade::harness
