#include "blindtrade/masking/alias_map.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>

#include "blindtrade/core/error.hpp"
#include "blindtrade/core/rng.hpp"
#include "blindtrade/data/board.hpp"

namespace blindtrade::masking {

std::string_view level_name(MaskLevel l) {
    switch (l) {
        case MaskLevel::Bright: return "bright";
        case MaskLevel::StockBlind: return "stock_blind";
        case MaskLevel::DateBlind: return "date_blind";
        case MaskLevel::Blinded: return "blinded";
    }
    return "bright";
}

MaskLevel parse_level(std::string_view name) {
    std::string n(name);
    std::replace(n.begin(), n.end(), '-', '_');
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (MaskLevel l : kAllLevels)
        if (level_name(l) == n) return l;
    throw std::invalid_argument("unknown mask level '" + std::string(name) + "'");
}

std::string relative_day_label(int offset) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "day_%+d", offset);
    return buf;
}

AliasMap::AliasMap(std::vector<std::string> tickers, std::shared_ptr<const data::TradingCalendar> calendar,
                   std::uint64_t seed, MaskLevel level, data::DayIndex anchor)
    : tickers_(std::move(tickers)), calendar_(std::move(calendar)), seed_(seed), level_(level), anchor_(anchor) {
    if (tickers_.size() > kMaxTickers)
        throw PreconditionError("alias map supports at most 10000 tickers, got " + std::to_string(tickers_.size()));
    if (!calendar_ || !calendar_->contains(anchor_)) throw PreconditionError("alias map anchor outside calendar");

    std::vector<std::size_t> perm(tickers_.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(seed_, "alias-permutation"));
    rng.shuffle(perm.begin(), perm.end());

    aliases_.reserve(tickers_.size());
    for (std::size_t i = 0; i < tickers_.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "asset_%04zu", perm[i]);
        aliases_.emplace_back(buf);
        if (!alias_index_.emplace(tickers_[i], i).second)
            throw PreconditionError("duplicate ticker in alias map: " + tickers_[i]);
        ticker_index_.emplace(aliases_.back(), i);
        code_index_.emplace(std::string(data::ticker_code(tickers_[i])), i);
    }
}

const std::string* AliasMap::ticker_by_code(std::string_view code) const {
    const auto it = code_index_.find(std::string(code));
    return it == code_index_.end() ? nullptr : &tickers_[it->second];
}

const std::string& AliasMap::alias_of(std::string_view ticker) const {
    const auto it = alias_index_.find(std::string(ticker));
    if (it == alias_index_.end()) throw InvalidArgument("", "ticker not in alias map");
    return aliases_[it->second];
}

std::string AliasMap::render_ticker(std::string_view ticker) const {
    if (masks_tickers(level_)) return alias_of(ticker);
    if (!has_ticker(ticker)) throw InvalidArgument("", "ticker not in alias map");
    return std::string(ticker);
}

std::string AliasMap::render_date(data::DayIndex day) const {
    if (masks_dates(level_)) return relative_day_label(day - anchor_);
    return calendar_->at(day).iso();
}

std::string AliasMap::resolve_ticker(std::string_view token, const std::string& path) const {
    if (masks_tickers(level_)) {
        const auto it = ticker_index_.find(std::string(token));
        if (it == ticker_index_.end()) throw InvalidArgument(path, "unknown stock id");
        return tickers_[it->second];
    }
    std::string norm;
    try {
        norm = data::normalize_ticker(token);
    } catch (const std::invalid_argument&) {
        throw InvalidArgument(path, "unknown stock id");
    }
    if (!has_ticker(norm)) throw InvalidArgument(path, "unknown stock id");
    return norm;
}

data::DayIndex AliasMap::resolve_date(std::string_view token, const std::string& path) const {
    if (masks_dates(level_)) {
        if (!token.starts_with("day_") || token.size() < 5) throw InvalidArgument(path, "expected a day_<offset> label");
        std::string_view num = token.substr(4);
        if (num.front() == '+') num.remove_prefix(1);
        int offset = 0;
        const auto res = std::from_chars(num.data(), num.data() + num.size(), offset);
        if (num.empty() || res.ec != std::errc() || res.ptr != num.data() + num.size())
            throw InvalidArgument(path, "malformed day label");
        const data::DayIndex day = anchor_ + offset;
        if (!calendar_->contains(day)) throw InvalidArgument(path, "day label outside the calendar");
        return day;
    }
    try {
        const auto idx = calendar_->index_of(Date::parse_iso(token));
        if (!idx) throw InvalidArgument(path, "not a trading day");
        return *idx;
    } catch (const std::invalid_argument& e) {
        if (dynamic_cast<const InvalidArgument*>(&e)) throw;
        throw InvalidArgument(path, "malformed date");
    }
}

Json AliasMap::to_json() const {
    Json j;
    j["seed"] = seed_;
    j["level"] = level_name(level_);
    j["anchor_date"] = calendar_->at(anchor_).iso();
    Json m = Json::object();
    for (std::size_t i = 0; i < tickers_.size(); ++i) m[tickers_[i]] = aliases_[i];
    j["aliases"] = std::move(m);
    return j;
}

AliasMap AliasMap::from_json(const Json& j, std::shared_ptr<const data::TradingCalendar> calendar) {
    std::vector<std::string> tickers;
    for (const auto& [k, v] : j.at("aliases").items()) tickers.push_back(k);
    const auto anchor = calendar->index_of(Date::parse_iso(j.at("anchor_date").get<std::string>()));
    if (!anchor) throw PreconditionError("alias map anchor date not in calendar");
    AliasMap m(std::move(tickers), std::move(calendar), j.at("seed").get<std::uint64_t>(),
               parse_level(j.at("level").get<std::string>()), *anchor);
    for (const auto& [k, v] : j.at("aliases").items())
        if (m.alias_of(k) != v.get<std::string>()) throw PreconditionError("alias map JSON does not match its seed");
    return m;
}

}  // namespace blindtrade::masking
