#include "blindtrade/data/board.hpp"

#include <cctype>
#include <stdexcept>

namespace blindtrade::data {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

}  // namespace

std::string normalize_ticker(std::string_view raw) {
    std::string t;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));

    if (t.size() == 8) {
        const std::string_view ex = std::string_view(t).substr(0, 2);
        if ((ex == "SH" || ex == "SZ" || ex == "BJ") && all_digits(std::string_view(t).substr(2))) return t;
    } else if (t.size() == 6 && all_digits(t)) {
        if (t[0] == '6') return "SH" + t;
        if (t.starts_with("00") || t.starts_with("30")) return "SZ" + t;
        if (t[0] == '8' || t[0] == '4') return "BJ" + t;
    }
    throw std::invalid_argument("unrecognized ticker '" + std::string(raw) + "'");
}

std::string_view ticker_code(std::string_view normalized) {
    return normalized.size() >= 6 ? normalized.substr(normalized.size() - 6) : normalized;
}

double limit_pct(Board b) {
    switch (b) {
        case Board::Main: return 0.095;
        case Board::ChiNext:
        case Board::Star: return 0.195;
        case Board::Bse: return 0.295;
    }
    return 0.095;
}

BoardClass classify_board(std::string_view ticker) {
    std::string norm;
    try {
        norm = normalize_ticker(ticker);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("cannot classify board for ticker '" + std::string(ticker) + "'");
    }
    const std::string_view code = ticker_code(norm);
    Board b;
    if (code.starts_with("688"))
        b = Board::Star;
    else if (code[0] == '6' || code.starts_with("00"))
        b = Board::Main;
    else if (code.starts_with("30"))
        b = Board::ChiNext;
    else if (code[0] == '8' || code[0] == '4')
        b = Board::Bse;
    else
        throw std::invalid_argument("cannot classify board for ticker '" + std::string(ticker) + "'");
    return BoardClass{b, limit_pct(b)};
}

std::string_view board_name(Board b) {
    switch (b) {
        case Board::Main: return "MAIN";
        case Board::ChiNext: return "CHINEXT";
        case Board::Star: return "STAR";
        case Board::Bse: return "BSE";
    }
    return "MAIN";
}

Board parse_board(std::string_view name) {
    for (Board b : kAllBoards)
        if (board_name(b) == name) return b;
    throw std::invalid_argument("unknown board '" + std::string(name) + "'");
}

}  // namespace blindtrade::data
