#pragma once

// Leading-order predictions for lambda^+ as a_n -> infinity, the constant D,
// and the decay-regime classification.

#include <cmath>
#include <complex>
#include <numbers>
#include <string_view>

#include "gpspectra/errors.hpp"
#include "gpspectra/kernel.hpp"
#include "gpspectra/quadrature.hpp"

namespace gpspectra {

/// D(r) = (pi/2) exp(i pi (1-r)/2) / sin(pi r), 0 < r < 1.
inline Complex constant_D(double r) {
    if (!(r > 0.0 && r < 1.0)) throw DomainError("constant_D requires 0 < r < 1");
    const double pi = std::numbers::pi;
    return (pi / 2.0) * std::polar(1.0, pi * (1.0 - r) / 2.0) / std::sin(pi * r);
}

struct DQuadrature {
    Complex value;  // (I1 + i I2) / 2
    double i1;      // int_0^inf t^{-r} / (1 + t^2) dt
    double i2;      // int_0^inf t^{1-r} / (1 + t^2) dt
    double deviation; // |value - constant_D(r)|
};

/// D from its defining integral (i/2) int_0^inf dt / (t^r (i + t)), split
/// into the two real integrals I1, I2.
inline DQuadrature constant_D_quadrature(double r, double tol = 1e-13) {
    const Complex closed = constant_D(r);
    quad::Options q;
    q.abs_tol = tol;
    q.rel_tol = 1e-14;
    auto phi = [](double t) { return 1.0 / (1.0 + t * t); };
    const double i1 = quad::half_line_power(phi, r, 2.0, q).value.real();
    const double i2 = quad::half_line_power(phi, r - 1.0, 2.0, q).value.real();
    const Complex value(0.5 * i1, 0.5 * i2);
    return DQuadrature{value, i1, i2, std::abs(value - closed)};
}

enum class RegimeTag {
    finite_sum_xi_lt_half,
    finite_sum_xi_eq_half,
    finite_sum_xi_gt_half,
    power_r_lt_half,
    power_r_in_half_one,
    power_r_eq_one,
};

inline std::string_view to_string(RegimeTag tag) {
    switch (tag) {
    case RegimeTag::finite_sum_xi_lt_half: return "finite_sum_xi_lt_half";
    case RegimeTag::finite_sum_xi_eq_half: return "finite_sum_xi_eq_half";
    case RegimeTag::finite_sum_xi_gt_half: return "finite_sum_xi_gt_half";
    case RegimeTag::power_r_lt_half: return "power_r_lt_half";
    case RegimeTag::power_r_in_half_one: return "power_r_in_half_one";
    case RegimeTag::power_r_eq_one: return "power_r_eq_one";
    }
    return "unknown";
}

struct AsymptoticPrediction {
    Complex value;
    double remainder_order = 0.0;      // real part: O(a^{-order})
    double remainder_order_imag = 0.0; // imaginary part: O(a^{-order})
    RegimeTag tag = RegimeTag::finite_sum_xi_eq_half;
};

inline constexpr double regime_tolerance = 1e-12;

namespace detail {

inline void require_mode(double a, double xi) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("a_n must be positive and finite");
    if (!(xi > 0.0 && xi < 1.0)) throw DomainError("xi must lie strictly inside (0,1)");
}

} // namespace detail

/// Finite-sum kernels: lambda^+ ~ -S1 / (2 a^{2(1-xi)}) + i a.
inline AsymptoticPrediction predict_finite_sum(double a, double xi, double s1) {
    detail::require_mode(a, xi);
    if (!(s1 >= 0.0) || !std::isfinite(s1)) throw DomainError("S1 must be finite and non-negative");
    AsymptoticPrediction out;
    out.value = Complex(-s1 / (2.0 * std::pow(a, 2.0 * (1.0 - xi))), a);
    out.remainder_order = 2.0 * (1.0 - xi);
    if (std::abs(xi - 0.5) <= regime_tolerance) {
        out.tag = RegimeTag::finite_sum_xi_eq_half;
        out.remainder_order_imag = 0.0;
    } else if (xi < 0.5) {
        out.tag = RegimeTag::finite_sum_xi_lt_half;
        out.remainder_order_imag = 1.0 - 2.0 * xi;
    } else {
        out.tag = RegimeTag::finite_sum_xi_gt_half;
        out.remainder_order_imag = -(1.0 - 2.0 * xi);
    }
    return out;
}

/// Power-law kernels:
///   r < 1: lambda^+ ~ i a - D A / (beta B^{1-r}) a^{-(1+r-2xi)}  (D complex),
///   r = 1: lambda^+ ~ i a - A / (2 beta) a^{-2(1-xi)} ln a.
inline AsymptoticPrediction predict_power_law(double a, double xi, const PowerLawFamily& family) {
    detail::require_mode(a, xi);
    family.validate();
    const double r = family.exponent_r();
    const double A = family.amplitude;
    const double B = family.scale;
    const double beta = family.beta;
    AsymptoticPrediction out;
    if (std::abs(r - 1.0) <= regime_tolerance) {
        out.value = Complex(-(A / (2.0 * beta)) * std::pow(a, -2.0 * (1.0 - xi)) * std::log(a), a);
        out.tag = RegimeTag::power_r_eq_one;
        out.remainder_order = 2.0 * (1.0 - xi);
    } else {
        const Complex m = constant_D(r) * A / (beta * std::pow(B, 1.0 - r));
        out.value = Complex(0.0, a) - m * std::pow(a, -(1.0 + r - 2.0 * xi));
        if (r < 0.5 - regime_tolerance) {
            out.tag = RegimeTag::power_r_lt_half;
            out.remainder_order = 2.0 * (r - xi) + 1.0;
        } else {
            out.tag = RegimeTag::power_r_in_half_one;
            out.remainder_order = 2.0 * (1.0 - xi);
        }
    }
    out.remainder_order_imag = out.remainder_order;
    return out;
}

enum class Regime { tends_to_axis, constant_offset, unbounded_decay };

inline std::string_view to_string(Regime regime) {
    switch (regime) {
    case Regime::tends_to_axis: return "tends_to_axis";
    case Regime::constant_offset: return "constant_offset";
    case Regime::unbounded_decay: return "unbounded_decay";
    }
    return "unknown";
}

/// Fate of Re lambda^+ as a_n grows, from the sign of 1 + r - 2 xi.
inline Regime classify_regime(double xi, double r) {
    if (!(xi > 0.0 && xi < 1.0)) throw DomainError("xi must lie strictly inside (0,1)");
    if (!(r > 0.0 && r <= 1.0 + regime_tolerance)) throw DomainError("r must lie in (0,1]");
    if (std::abs(r - 1.0) <= regime_tolerance) return Regime::tends_to_axis;
    const double boundary = 0.5 * (r + 1.0);
    if (std::abs(xi - boundary) <= regime_tolerance) return Regime::constant_offset;
    return xi < boundary ? Regime::tends_to_axis : Regime::unbounded_decay;
}

} // namespace gpspectra
