#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blindtrade/data/bar.hpp"
#include "blindtrade/data/board.hpp"
#include "blindtrade/data/calendar.hpp"

namespace blindtrade::data {

using TickerId = std::size_t;

/// Index-membership intervals: a ticker is a member on [in, out], `out` open-ended when absent.
struct MembershipInterval {
    Date in;
    std::optional<Date> out;
};
using Membership = std::map<std::string, std::vector<MembershipInterval>>;

Membership load_membership(const std::string& path);

/// Immutable daily market data for one universe.
///
/// Bars are held densely per ticker and aligned to the calendar; absent bars
/// (suspensions, pre-listing) are empty slots. Safe to share across threads once built.
class MarketStore {
public:
    MarketStore(TradingCalendar calendar, std::vector<Bar> bars, std::optional<Membership> membership = {});

    const TradingCalendar& calendar() const { return calendar_; }
    std::span<const std::string> tickers() const { return tickers_; }
    std::size_t ticker_count() const { return tickers_.size(); }
    std::optional<TickerId> id_of(std::string_view ticker) const;
    const std::string& ticker(TickerId id) const { return tickers_.at(id); }
    const BoardClass& board(TickerId id) const { return boards_.at(id); }

    const DailyBar* bar(TickerId id, DayIndex day) const;
    /// Days (ascending) on which `id` has a bar.
    std::span<const DayIndex> bar_days(TickerId id) const { return bar_days_.at(id); }
    /// Number of bars strictly before `day`.
    std::size_t bars_before(TickerId id, DayIndex day) const;
    /// Most recent bar strictly before `day`.
    std::optional<DayIndex> last_bar_before(TickerId id, DayIndex day) const;

    bool is_member(TickerId id, DayIndex day) const;
    /// Members at `day` with a bar on the previous trading day: what an agent may trade.
    std::vector<TickerId> tradable(DayIndex day) const;
    /// Members with bars at both `day` and `day - 1`: the regression cross-section N_t.
    std::vector<TickerId> investable(DayIndex day) const;
    /// Close-to-close return for `day`; nullopt unless bars exist at day and day - 1.
    std::optional<double> close_return(TickerId id, DayIndex day) const;

    /// Equal-weight, daily-rebalanced index over the investable set; level 1.0 at day 0.
    std::span<const double> index_level() const { return index_level_; }

    std::vector<Bar> all_bars() const;

private:
    TradingCalendar calendar_;
    std::vector<std::string> tickers_;
    std::vector<BoardClass> boards_;
    std::vector<std::vector<std::optional<DailyBar>>> bars_;
    std::vector<std::vector<DayIndex>> bar_days_;
    std::vector<std::vector<std::pair<DayIndex, DayIndex>>> member_spans_;
    std::vector<double> index_level_;
};

/// Reads `ticker,date,open,high,low,close,volume,amount` with a header row.
/// Malformed rows, OHLC violations and duplicate (ticker, date) pairs throw DataError
/// carrying the 1-based line number. Without `calendar_path` the calendar is the
/// union of bar dates.
MarketStore ingest_csv(const std::string& path, const std::optional<std::string>& calendar_path = {},
                       const std::optional<std::string>& membership_path = {});

/// Writes the same CSV format `ingest_csv` reads.
void write_csv(const MarketStore& store, const std::string& path);

}  // namespace blindtrade::data
