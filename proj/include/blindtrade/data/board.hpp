#pragma once

#include <string>
#include <string_view>

namespace blindtrade::data {

enum class Board { Main, ChiNext, Star, Bse };

inline constexpr Board kAllBoards[] = {Board::Main, Board::ChiNext, Board::Star, Board::Bse};

struct BoardClass {
    Board board;
    /// Engine threshold: the official daily limit less a half-point buffer.
    double limit_pct;

    friend bool operator==(const BoardClass&, const BoardClass&) = default;
};

/// Upper-cases, trims, and accepts `[SH|SZ|BJ]dddddd`. Returns the 6-digit code
/// prefixed with the exchange (inferred from the code when absent).
/// Throws std::invalid_argument on anything else.
std::string normalize_ticker(std::string_view raw);

/// The six numeric digits of a normalized ticker.
std::string_view ticker_code(std::string_view normalized);

/// Main board (6xxxxx / 00xxxx) 9.5%, ChiNext (30xxxx) and STAR (688xxx) 19.5%,
/// Beijing (8xxxxx / 4xxxxx) 29.5%. Throws std::invalid_argument naming the ticker otherwise.
BoardClass classify_board(std::string_view ticker);

double limit_pct(Board b);
std::string_view board_name(Board b);
Board parse_board(std::string_view name);

}  // namespace blindtrade::data
