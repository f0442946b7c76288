#pragma once

// Log-log least-squares fits of error sequences against the mode frequency.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gpspectra/errors.hpp"

namespace gpspectra {

struct OrderFit {
    double slope = 0.0;
    double half_width = 0.0; // 2 standard errors of the slope
    double intercept = 0.0;  // log(error) at log(a) = 0
    std::size_t points = 0;
    bool below_floor = false; // some error was exactly zero; slope is meaningless
};

namespace detail {

// Ordinary least squares of log y on log x; no preconditions beyond >= 2
// distinct x and positive values.
inline OrderFit log_log_fit(std::span<const std::pair<double, double>> pairs) {
    const std::size_t n = pairs.size();
    if (n < 2) throw DomainError("log-log fit needs at least two points");
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : pairs) {
        if (!(x > 0.0) || !(y > 0.0)) throw DomainError("log-log fit needs positive data");
        mx += std::log(x);
        my += std::log(y);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : pairs) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    if (!(sxx > 0.0)) throw DomainError("log-log fit needs distinct abscissae");
    OrderFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.points = n;
    if (n > 2) {
        double ss = 0.0;
        for (const auto& [x, y] : pairs) {
            const double e = std::log(y) - (fit.intercept + fit.slope * std::log(x));
            ss += e * e;
        }
        fit.half_width = 2.0 * std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

} // namespace detail

/// Fitted exponent p in error ~ C a^p. Requires at least 4 points whose
/// abscissae span two decades.
inline OrderFit empirical_order(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 4) throw DomainError("empirical_order needs at least 4 points");
    double lo = pairs.front().first;
    double hi = lo;
    for (const auto& [a, e] : pairs) {
        if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("empirical_order needs positive a_n");
        if (!(e >= 0.0) || !std::isfinite(e)) throw DomainError("empirical_order needs finite errors >= 0");
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if (hi / lo < 100.0 * (1.0 - 1e-12)) {
        throw DomainError("empirical_order needs a_n spanning at least two decades");
    }
    for (const auto& [a, e] : pairs) {
        if (e == 0.0) {
            OrderFit floor;
            floor.points = pairs.size();
            floor.below_floor = true;
            return floor;
        }
    }
    return detail::log_log_fit(pairs);
}

inline OrderFit empirical_order(const std::vector<std::pair<double, double>>& pairs) {
    return empirical_order(std::span<const std::pair<double, double>>(pairs));
}

} // namespace gpspectra
