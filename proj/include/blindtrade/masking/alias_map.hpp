#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "blindtrade/core/json.hpp"
#include "blindtrade/data/calendar.hpp"
#include "blindtrade/masking/mask_level.hpp"

namespace blindtrade::masking {

/// Per-episode masking state: a seeded ticker <-> asset_NNNN bijection and a
/// relative-day anchor. Immutable once built; never shipped to agents.
class AliasMap {
public:
    static constexpr std::size_t kMaxTickers = 10000;

    /// `tickers` is the full store universe. Throws PreconditionError for more than 10,000 names
    /// or an anchor outside the calendar.
    AliasMap(std::vector<std::string> tickers, std::shared_ptr<const data::TradingCalendar> calendar,
             std::uint64_t seed, MaskLevel level, data::DayIndex anchor);

    MaskLevel level() const { return level_; }
    std::uint64_t seed() const { return seed_; }
    data::DayIndex anchor() const { return anchor_; }
    const data::TradingCalendar& calendar() const { return *calendar_; }
    std::span<const std::string> tickers() const { return tickers_; }

    /// asset_NNNN regardless of level. Throws InvalidArgument for tickers outside the map.
    const std::string& alias_of(std::string_view ticker) const;
    bool has_ticker(std::string_view ticker) const { return alias_index_.contains(std::string(ticker)); }
    /// The mapped ticker whose six-digit code is `code`, or nullptr.
    const std::string* ticker_by_code(std::string_view code) const;

    /// What the agent sees for a ticker / day at this level.
    std::string render_ticker(std::string_view ticker) const;
    std::string render_date(data::DayIndex day) const;

    /// Inverse of render_*: throws InvalidArgument for tokens the map cannot resolve.
    std::string resolve_ticker(std::string_view token, const std::string& path = {}) const;
    data::DayIndex resolve_date(std::string_view token, const std::string& path = {}) const;

    Json to_json() const;
    static AliasMap from_json(const Json& j, std::shared_ptr<const data::TradingCalendar> calendar);

private:
    std::vector<std::string> tickers_;
    std::vector<std::string> aliases_;
    std::unordered_map<std::string, std::size_t> alias_index_;   // ticker -> position
    std::unordered_map<std::string, std::size_t> ticker_index_;  // alias -> position
    std::unordered_map<std::string, std::size_t> code_index_;    // 6-digit code -> position
    std::shared_ptr<const data::TradingCalendar> calendar_;
    std::uint64_t seed_;
    MaskLevel level_;
    data::DayIndex anchor_;
};

/// "day_+12", "day_-3", "day_+0".
std::string relative_day_label(int offset);

}  // namespace blindtrade::masking
