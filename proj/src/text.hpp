#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace qge::detail {

// Shortest round-trip decimal; "nan"/"inf" spelled out.
inline std::string num(double x) {
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

} // namespace qge::detail
