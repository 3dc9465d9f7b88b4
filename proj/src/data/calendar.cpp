#include "blindtrade/data/calendar.hpp"

#include <algorithm>
#include <fstream>

#include "blindtrade/core/error.hpp"

namespace blindtrade::data {

TradingCalendar::TradingCalendar(std::vector<Date> days) : days_(std::move(days)) {
    for (std::size_t i = 1; i < days_.size(); ++i)
        if (!(days_[i - 1] < days_[i]))
            throw DataError("calendar not strictly increasing at " + days_[i].iso());
}

TradingCalendar TradingCalendar::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open calendar file " + path);
    std::vector<Date> days;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        try {
            days.push_back(Date::parse_iso(line));
        } catch (const std::invalid_argument& e) {
            throw DataError(e.what(), n);
        }
        if (days.size() > 1 && !(days[days.size() - 2] < days.back()))
            throw DataError("calendar not strictly increasing", n);
    }
    return TradingCalendar(std::move(days));
}

const Date& TradingCalendar::at(DayIndex i) const {
    if (!contains(i)) throw PreconditionError("day index " + std::to_string(i) + " outside calendar");
    return days_[static_cast<std::size_t>(i)];
}

std::optional<DayIndex> TradingCalendar::index_of(const Date& d) const {
    const auto it = std::lower_bound(days_.begin(), days_.end(), d);
    if (it == days_.end() || *it != d) return std::nullopt;
    return static_cast<DayIndex>(it - days_.begin());
}

std::optional<DayIndex> TradingCalendar::on_or_after(const Date& d) const {
    const auto it = std::lower_bound(days_.begin(), days_.end(), d);
    if (it == days_.end()) return std::nullopt;
    return static_cast<DayIndex>(it - days_.begin());
}

std::optional<DayIndex> TradingCalendar::on_or_before(const Date& d) const {
    const auto it = std::upper_bound(days_.begin(), days_.end(), d);
    if (it == days_.begin()) return std::nullopt;
    return static_cast<DayIndex>(it - days_.begin() - 1);
}

}  // namespace blindtrade::data
