#include "blindtrade/data/market_store.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "blindtrade/core/error.hpp"

namespace blindtrade::data {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            std::string_view f = line.substr(start, i - start);
            while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
            while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
            out.push_back(f);
            start = i + 1;
        }
    }
    return out;
}

double parse_number(std::string_view f, const char* field, std::size_t line) {
    double v = 0.0;
    const auto* end = f.data() + f.size();
    const auto res = std::from_chars(f.data(), end, v);
    if (f.empty() || res.ec != std::errc() || res.ptr != end)
        throw DataError(std::string("bad ") + field + " value '" + std::string(f) + "'", line);
    return v;
}

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

Membership load_membership(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open membership file " + path);
    Membership m;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv(line);
        if (n == 1 && !f.empty() && f[0] == "ticker") continue;
        if (f.size() < 2 || f.size() > 3) throw DataError("expected ticker,in_date[,out_date]", n);
        try {
            MembershipInterval iv{Date::parse_iso(f[1]), std::nullopt};
            if (f.size() == 3 && !f[2].empty()) iv.out = Date::parse_iso(f[2]);
            m[normalize_ticker(f[0])].push_back(iv);
        } catch (const std::invalid_argument& e) {
            throw DataError(e.what(), n);
        }
    }
    return m;
}

MarketStore::MarketStore(TradingCalendar calendar, std::vector<Bar> bars, std::optional<Membership> membership) {
    if (calendar.empty()) {
        std::set<Date> ds;
        for (const auto& b : bars) ds.insert(b.date);
        calendar = TradingCalendar(std::vector<Date>(ds.begin(), ds.end()));
    }
    calendar_ = std::move(calendar);

    std::set<std::string> names;
    for (const auto& b : bars) names.insert(b.ticker);
    tickers_.assign(names.begin(), names.end());
    for (const auto& t : tickers_) boards_.push_back(classify_board(t));

    const auto T = calendar_.size();
    bars_.assign(tickers_.size(), std::vector<std::optional<DailyBar>>(T));
    for (const auto& b : bars) {
        const auto id = *id_of(b.ticker);
        const auto day = calendar_.index_of(b.date);
        if (!day) throw DataError("bar date " + b.date.iso() + " for " + b.ticker + " not in calendar");
        auto& slot = bars_[id][static_cast<std::size_t>(*day)];
        if (slot) throw DataError("duplicate bar " + b.ticker + " " + b.date.iso());
        if (auto err = check_bar(b.values); !err.empty())
            throw DataError(err + " for " + b.ticker + " " + b.date.iso());
        slot = b.values;
    }

    bar_days_.resize(tickers_.size());
    for (std::size_t i = 0; i < tickers_.size(); ++i)
        for (std::size_t t = 0; t < T; ++t)
            if (bars_[i][t]) bar_days_[i].push_back(static_cast<DayIndex>(t));

    member_spans_.resize(tickers_.size());
    for (std::size_t i = 0; i < tickers_.size(); ++i) {
        if (!membership) {
            member_spans_[i].emplace_back(0, static_cast<DayIndex>(T) - 1);
            continue;
        }
        const auto it = membership->find(tickers_[i]);
        if (it == membership->end()) continue;
        for (const auto& iv : it->second) {
            const auto lo = calendar_.on_or_after(iv.in);
            const auto hi = iv.out ? calendar_.on_or_before(*iv.out) : std::optional<DayIndex>(static_cast<DayIndex>(T) - 1);
            if (lo && hi && *lo <= *hi) member_spans_[i].emplace_back(*lo, *hi);
        }
    }

    index_level_.assign(T, 1.0);
    for (std::size_t t = 1; t < T; ++t) {
        double sum = 0.0;
        std::size_t n = 0;
        for (auto id : investable(static_cast<DayIndex>(t))) {
            sum += *close_return(id, static_cast<DayIndex>(t));
            ++n;
        }
        index_level_[t] = index_level_[t - 1] * (1.0 + (n ? sum / static_cast<double>(n) : 0.0));
    }
}

std::optional<TickerId> MarketStore::id_of(std::string_view ticker) const {
    const auto it = std::lower_bound(tickers_.begin(), tickers_.end(), ticker);
    if (it == tickers_.end() || *it != ticker) return std::nullopt;
    return static_cast<TickerId>(it - tickers_.begin());
}

const DailyBar* MarketStore::bar(TickerId id, DayIndex day) const {
    if (id >= bars_.size() || !calendar_.contains(day)) return nullptr;
    const auto& slot = bars_[id][static_cast<std::size_t>(day)];
    return slot ? &*slot : nullptr;
}

std::size_t MarketStore::bars_before(TickerId id, DayIndex day) const {
    const auto& d = bar_days_.at(id);
    return static_cast<std::size_t>(std::lower_bound(d.begin(), d.end(), day) - d.begin());
}

std::optional<DayIndex> MarketStore::last_bar_before(TickerId id, DayIndex day) const {
    const auto n = bars_before(id, day);
    if (n == 0) return std::nullopt;
    return bar_days_[id][n - 1];
}

bool MarketStore::is_member(TickerId id, DayIndex day) const {
    for (const auto& [lo, hi] : member_spans_.at(id))
        if (day >= lo && day <= hi) return true;
    return false;
}

std::vector<TickerId> MarketStore::tradable(DayIndex day) const {
    std::vector<TickerId> out;
    for (TickerId id = 0; id < tickers_.size(); ++id)
        if (is_member(id, day) && bar(id, day - 1)) out.push_back(id);
    return out;
}

std::vector<TickerId> MarketStore::investable(DayIndex day) const {
    std::vector<TickerId> out;
    for (TickerId id = 0; id < tickers_.size(); ++id)
        if (is_member(id, day) && bar(id, day) && bar(id, day - 1)) out.push_back(id);
    return out;
}

std::optional<double> MarketStore::close_return(TickerId id, DayIndex day) const {
    const auto* b = bar(id, day);
    const auto* p = bar(id, day - 1);
    if (!b || !p) return std::nullopt;
    return b->close / p->close - 1.0;
}

std::vector<Bar> MarketStore::all_bars() const {
    std::vector<Bar> out;
    for (std::size_t i = 0; i < tickers_.size(); ++i)
        for (DayIndex t : bar_days_[i]) out.push_back(Bar{tickers_[i], calendar_.at(t), *bars_[i][static_cast<std::size_t>(t)]});
    return out;
}

MarketStore ingest_csv(const std::string& path, const std::optional<std::string>& calendar_path,
                       const std::optional<std::string>& membership_path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open bar file " + path);
    std::vector<Bar> bars;
    std::set<std::pair<std::string, Date>> seen;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto f = split_csv(line);
        if (n == 1) {
            static const char* kHeader[] = {"ticker", "date", "open", "high", "low", "close", "volume", "amount"};
            bool ok = f.size() == 8;
            for (std::size_t i = 0; ok && i < 8; ++i) ok = f[i] == kHeader[i];
            if (!ok) throw DataError("expected header ticker,date,open,high,low,close,volume,amount", n);
            continue;
        }
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 8) throw DataError("expected 8 columns, got " + std::to_string(f.size()), n);
        Bar b;
        try {
            b.ticker = normalize_ticker(f[0]);
            b.date = Date::parse_iso(f[1]);
        } catch (const std::invalid_argument& e) {
            throw DataError(e.what(), n);
        }
        b.values.open = parse_number(f[2], "open", n);
        b.values.high = parse_number(f[3], "high", n);
        b.values.low = parse_number(f[4], "low", n);
        b.values.close = parse_number(f[5], "close", n);
        b.values.volume = parse_number(f[6], "volume", n);
        b.values.amount = parse_number(f[7], "amount", n);
        if (auto err = check_bar(b.values); !err.empty()) throw DataError(err, n);
        if (!seen.emplace(b.ticker, b.date).second)
            throw DataError("duplicate bar for " + b.ticker + " on " + b.date.iso(), n);
        bars.push_back(std::move(b));
    }
    TradingCalendar cal = calendar_path ? TradingCalendar::load(*calendar_path) : TradingCalendar{};
    std::optional<Membership> mem;
    if (membership_path) mem = load_membership(*membership_path);
    return MarketStore(std::move(cal), std::move(bars), std::move(mem));
}

void write_csv(const MarketStore& store, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "ticker,date,open,high,low,close,volume,amount\n";
    for (const auto& b : store.all_bars()) {
        out << b.ticker << ',' << b.date.iso() << ',' << fmt_double(b.values.open) << ',' << fmt_double(b.values.high)
            << ',' << fmt_double(b.values.low) << ',' << fmt_double(b.values.close) << ','
            << fmt_double(b.values.volume) << ',' << fmt_double(b.values.amount) << '\n';
    }
}

}  // namespace blindtrade::data
