#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace blindtrade {

/// Fixed-point CNY amount with a 0.01 quantum.
struct Money {
    std::int64_t cents = 0;

    static constexpr Money from_cents(std::int64_t c) { return Money{c}; }
    static Money from_cny(double cny) { return Money{std::llround(cny * 100.0)}; }

    double cny() const { return static_cast<double>(cents) / 100.0; }
    std::string str() const;

    Money& operator+=(Money o) { cents += o.cents; return *this; }
    Money& operator-=(Money o) { cents -= o.cents; return *this; }
    friend Money operator+(Money a, Money b) { return Money{a.cents + b.cents}; }
    friend Money operator-(Money a, Money b) { return Money{a.cents - b.cents}; }
    friend constexpr auto operator<=>(const Money&, const Money&) = default;
};

/// Notional of `shares` at `price` CNY, rounded to the cent.
inline Money notional(std::int64_t shares, double price) {
    return Money{std::llround(static_cast<double>(shares) * price * 100.0)};
}

/// rate_bps applied to an amount, rounded half-up to the cent, floored at `minimum`.
inline Money proportional_cost(Money amount, std::int64_t rate_bps, Money minimum) {
    const std::int64_t raw = (amount.cents * rate_bps + 5000) / 10000;
    return Money{raw > minimum.cents ? raw : minimum.cents};
}

}  // namespace blindtrade
