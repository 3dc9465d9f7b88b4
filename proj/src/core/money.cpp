#include "blindtrade/core/money.hpp"

#include <cstdio>
#include <cstdlib>

namespace blindtrade {

std::string Money::str() const {
    const std::int64_t a = std::llabs(cents);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", cents < 0 ? "-" : "", static_cast<long long>(a / 100),
                  static_cast<long long>(a % 100));
    return buf;
}

}  // namespace blindtrade
