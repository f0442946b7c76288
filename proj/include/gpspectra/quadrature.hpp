#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature for complex-valued integrands on
// finite intervals, plus a half-line helper for integrands with an algebraic
// singularity t^{-s} at the origin and algebraic decay at infinity.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "gpspectra/errors.hpp"

namespace gpspectra::quad {

using Complex = std::complex<double>;

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_panels = 5000;
};

struct Result {
    Complex value;
    double error = 0.0;
    int panels = 0;
};

namespace detail {

// Kronrod abscissae on [0,1) half of [-1,1]; odd indices are the Gauss nodes.
inline constexpr std::array<double, 8> kronrod_nodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> gauss_weights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo;
    double hi;
    Complex value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel evaluate_panel(F& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    Complex kronrod{0.0, 0.0};
    Complex gauss{0.0, 0.0};
    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = half * kronrod_nodes[i];
        const Complex fsum = Complex(f(center - dx)) + Complex(f(center + dx));
        kronrod += kronrod_weights[i] * fsum;
        if (i % 2 == 1) {
            gauss += gauss_weights[i / 2] * fsum;
        }
    }
    const Complex fc = f(center);
    kronrod += kronrod_weights[7] * fc;
    gauss += gauss_weights[3] * fc;
    kronrod *= half;
    gauss *= half;
    if (!std::isfinite(kronrod.real()) || !std::isfinite(kronrod.imag())) {
        throw QuadratureFailure("non-finite integrand value on panel [" + std::to_string(lo) +
                                ", " + std::to_string(hi) + "]");
    }
    return Panel{lo, hi, kronrod, std::abs(kronrod - gauss)};
}

} // namespace detail

/// Integrates f over [lo, hi]. Panels are bisected worst-first until the summed
/// error estimate drops below max(abs_tol, rel_tol*|I|).
template <class F>
Result integrate(F&& f, double lo, double hi, const Options& options = {}) {
    if (!(lo < hi)) {
        if (lo == hi) return Result{};
        throw QuadratureFailure("integration bounds out of order");
    }
    std::priority_queue<detail::Panel> panels;
    panels.push(detail::evaluate_panel(f, lo, hi));
    Complex total = panels.top().value;
    double error = panels.top().error;
    // Panels whose nodes are no longer distinct in double are frozen; their
    // error is round-off dominated and no longer counts against the target.
    constexpr double eps = std::numeric_limits<double>::epsilon();
    std::vector<detail::Panel> frozen;
    double frozen_error = 0.0;
    int count = 1;
    while (true) {
        const double target = std::max(options.abs_tol, options.rel_tol * std::abs(total));
        if (error - frozen_error <= target || panels.empty()) break;
        if (count >= options.max_panels) {
            throw QuadratureFailure("adaptive quadrature did not converge: error estimate " +
                                    std::to_string(error) + " after " + std::to_string(count) +
                                    " panels");
        }
        detail::Panel worst = panels.top();
        panels.pop();
        const double scale = std::max({std::abs(worst.lo), std::abs(worst.hi), std::numeric_limits<double>::min()});
        if (worst.hi - worst.lo < 64.0 * eps * scale) {
            frozen.push_back(worst);
            frozen_error += worst.error;
            continue;
        }
        const double mid = 0.5 * (worst.lo + worst.hi);
        detail::Panel left = detail::evaluate_panel(f, worst.lo, mid);
        detail::Panel right = detail::evaluate_panel(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++count;
    }
    // Re-sum to shed drift from the incremental updates.
    Complex value{0.0, 0.0};
    double err = 0.0;
    while (!panels.empty()) {
        value += panels.top().value;
        err += panels.top().error;
        panels.pop();
    }
    for (const auto& p : frozen) {
        value += p.value;
        err += p.error;
    }
    return Result{value, err, count};
}

/// Integral over (0, inf) of t^{-s} phi(t) for s < 1, where phi is smooth on
/// [0, inf) and phi(t) ~ t^{-q} at infinity with s + q > 1.
///
/// [0,1]: t = u^{1/(1-s)} absorbs the origin singularity exactly.
/// [1,inf): t = w^{-m}, m = 1/(s+q-1), maps the algebraic tail onto a bounded
/// integrand on (0,1].
template <class Phi>
Result half_line_power(Phi&& phi, double s, double q, const Options& options = {}) {
    if (!(s < 1.0) || !(s + q > 1.0)) {
        throw DomainError("half_line_power requires s < 1 and s + q > 1");
    }
    const double p = 1.0 / (1.0 - s);
    const double m = 1.0 / (s + q - 1.0);
    auto near = [&](double u) { return p * Complex(phi(std::pow(u, p))); };
    // In the mapped variable the integrand is m * t^q phi(t); t^q phi(t) tends
    // to a constant, so t is capped where that limit is reached to double precision.
    auto far = [&](double w) {
        const double t = std::min(std::exp(-m * std::log(w)), 1e100);
        return m * std::pow(t, q) * Complex(phi(t));
    };
    Result a = integrate(near, 0.0, 1.0, options);
    Result b = integrate(far, 0.0, 1.0, options);
    return Result{a.value + b.value, a.error + b.error, a.panels + b.panels};
}

} // namespace gpspectra::quad
