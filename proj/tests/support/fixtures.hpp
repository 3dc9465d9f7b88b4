#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "blindtrade/data/market_store.hpp"

namespace bt_test {

using blindtrade::Date;
using blindtrade::data::Bar;
using blindtrade::data::DailyBar;
using blindtrade::data::DayIndex;
using blindtrade::data::MarketStore;
using blindtrade::data::TradingCalendar;

/// Weekdays starting at `first`.
inline std::vector<Date> weekdays(int n, Date first = Date(2023, 1, 2)) {
    std::vector<Date> out;
    for (Date d = first; static_cast<int>(out.size()) < n; d = d + 1)
        if (d.weekday() != 0 && d.weekday() != 6) out.push_back(d);
    return out;
}

/// Hand-built bars on a weekday calendar. Unset slots are missing bars.
class StoreBuilder {
public:
    explicit StoreBuilder(int days) : days_(weekdays(days)) {}

    StoreBuilder& bar(const std::string& t, DayIndex d, double open, double high, double low, double close,
                      double amount = 5e7) {
        bars_[{t, d}] = DailyBar{open, high, low, close, amount / close, amount};
        return *this;
    }
    StoreBuilder& flat(const std::string& t, double price, DayIndex from = 0, DayIndex to = -1) {
        if (to < 0) to = static_cast<DayIndex>(days_.size()) - 1;
        for (DayIndex d = from; d <= to; ++d) bar(t, d, price, price, price, price);
        return *this;
    }
    StoreBuilder& erase(const std::string& t, DayIndex d) {
        bars_.erase({t, d});
        return *this;
    }
    const std::vector<Date>& days() const { return days_; }

    MarketStore build() const {
        std::vector<Bar> bars;
        for (const auto& [k, v] : bars_) bars.push_back(Bar{k.first, days_[static_cast<std::size_t>(k.second)], v});
        return MarketStore(TradingCalendar(days_), std::move(bars));
    }

private:
    std::vector<Date> days_;
    std::map<std::pair<std::string, DayIndex>, DailyBar> bars_;
};

/// A fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("bt_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

}  // namespace bt_test
