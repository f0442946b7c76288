#pragma once

// Memory kernels K(t) = sum_k c_k exp(-gamma_k t) and their Laplace transforms
// Khat(z) = sum_k c_k / (z + gamma_k).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gpspectra/errors.hpp"
#include "gpspectra/quadrature.hpp"

namespace gpspectra {

using Complex = std::complex<double>;

namespace detail {

// Neumaier-compensated accumulator, applied to real and imaginary parts.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

  private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

class CompensatedComplexSum {
  public:
    void add(Complex z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    Complex value() const { return {re_.value(), im_.value()}; }

  private:
    CompensatedSum re_;
    CompensatedSum im_;
};

inline std::string format_complex(Complex z) {
    std::ostringstream os;
    os.precision(17);
    os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return os.str();
}

} // namespace detail

/// Finite exponential ladder (c_k, gamma_k), k = 1..N.
///
/// Construction enforces the structural invariants: N >= 1, equal lengths,
/// c_k > 0 and 0 < gamma_1 < ... < gamma_N. Admissibility (sum c_k/gamma_k < 1)
/// is a property of the ladder reported by admissibility_report, not a
/// construction requirement, so inadmissible ladders can still be inspected.
class ExponentialKernel {
  public:
    ExponentialKernel(std::vector<double> coeffs, std::vector<double> rates)
        : coeffs_(std::move(coeffs)), rates_(std::move(rates)) {
        if (coeffs_.empty()) throw DomainError("kernel needs at least one term");
        if (coeffs_.size() != rates_.size()) {
            throw DomainError("kernel coeffs and rates differ in length");
        }
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
            if (!(coeffs_[k] > 0.0) || !std::isfinite(coeffs_[k])) {
                throw DomainError("kernel coefficient c_" + std::to_string(k + 1) +
                                  " must be positive and finite");
            }
            if (!(rates_[k] > 0.0) || !std::isfinite(rates_[k])) {
                throw DomainError("kernel rate gamma_" + std::to_string(k + 1) +
                                  " must be positive and finite");
            }
            if (k > 0 && !(rates_[k] > rates_[k - 1])) {
                throw DomainError("kernel rates must be strictly increasing (gamma_" +
                                  std::to_string(k + 1) + ")");
            }
        }
    }

    std::size_t size() const { return coeffs_.size(); }
    std::span<const double> coeffs() const { return coeffs_; }
    std::span<const double> rates() const { return rates_; }
    double largest_rate() const { return rates_.back(); }

    /// S = sum c_k / gamma_k (= Khat(0) = ||K||_{L1}).
    double weighted_sum() const {
        detail::CompensatedSum s;
        for (std::size_t k = 0; k < size(); ++k) s.add(coeffs_[k] / rates_[k]);
        return s.value();
    }

    /// S1 = sum c_k (= K(0)).
    double coefficient_sum() const {
        detail::CompensatedSum s;
        for (double c : coeffs_) s.add(c);
        return s.value();
    }

  private:
    std::vector<double> coeffs_;
    std::vector<double> rates_;
};

struct AdmissibilityReport {
    double weighted_sum;    // S
    double coefficient_sum; // S1
    bool admissible;        // S < 1
    /// max_k gamma_k (gamma_{k+1} - gamma_k) over the available ladder. The
    /// unbounded-sup condition on the infinite ladder cannot be decided from a
    /// finite truncation; this is informational only.
    double tail_gap_proxy;
};

inline AdmissibilityReport admissibility_report(const ExponentialKernel& kernel) {
    const auto g = kernel.rates();
    double proxy = 0.0;
    for (std::size_t k = 0; k + 1 < g.size(); ++k) {
        proxy = std::max(proxy, g[k] * (g[k + 1] - g[k]));
    }
    const double s = kernel.weighted_sum();
    return AdmissibilityReport{s, kernel.coefficient_sum(), s < 1.0, proxy};
}

/// Generator c_k = A / k^alpha, gamma_k = B k^beta for k = 1..N.
struct PowerLawFamily {
    double amplitude = 1.0; // A
    double scale = 1.0;     // B
    double alpha = 1.0;
    double beta = 1.0;
    std::size_t terms = 1; // N

    /// r = (alpha + beta - 1) / beta, in (0, 1].
    double exponent_r() const { return (alpha + beta - 1.0) / beta; }

    void validate() const {
        if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
            throw DomainError("power-law amplitude A must be positive");
        }
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            throw DomainError("power-law scale B must be positive");
        }
        if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("power-law alpha must lie in (0,1]");
        if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("power-law beta must be positive");
        if (!(alpha + beta > 1.0)) throw DomainError("power-law family needs alpha + beta > 1");
        if (terms == 0) throw DomainError("power-law truncation N must be positive");
    }
};

/// Leading terms of the family only: c_k = A/k^alpha, gamma_k = B k^beta.
inline ExponentialKernel materialize(const PowerLawFamily& family) {
    family.validate();
    std::vector<double> c(family.terms);
    std::vector<double> g(family.terms);
    for (std::size_t k = 1; k <= family.terms; ++k) {
        const double kk = static_cast<double>(k);
        c[k - 1] = family.amplitude / std::pow(kk, family.alpha);
        g[k - 1] = family.scale * std::pow(kk, family.beta);
    }
    return ExponentialKernel(std::move(c), std::move(g));
}

/// Integral-comparison bound on sum_{k>N} c_k/gamma_k for the leading-term ladder.
inline double truncation_tail_bound(const PowerLawFamily& family) {
    family.validate();
    const double p = family.alpha + family.beta - 1.0;
    return family.amplitude /
           (family.scale * p * std::pow(static_cast<double>(family.terms), p));
}

inline constexpr double default_pole_guard = 1e-13;

/// Khat(z) = sum c_k / (z + gamma_k). Throws PoleProximity when
/// min_k |z + gamma_k| < relative_guard * gamma_N.
inline Complex laplace(const ExponentialKernel& kernel, Complex z,
                       double relative_guard = default_pole_guard) {
    const auto c = kernel.coeffs();
    const auto g = kernel.rates();
    const double guard = relative_guard * kernel.largest_rate();
    detail::CompensatedComplexSum sum;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double d = z.real() + g[k];
        const double denom = d * d + z.imag() * z.imag();
        if (std::sqrt(denom) < guard) {
            throw PoleProximity("Khat evaluated within pole guard of -gamma_" +
                                std::to_string(k + 1) + " at z = " + detail::format_complex(z));
        }
        sum.add(Complex(c[k] * d / denom, -c[k] * z.imag() / denom));
    }
    return sum.value();
}

/// Khat'(z) = -sum c_k / (z + gamma_k)^2, same pole guard as laplace.
inline Complex laplace_deriv(const ExponentialKernel& kernel, Complex z,
                             double relative_guard = default_pole_guard) {
    const auto c = kernel.coeffs();
    const auto g = kernel.rates();
    const double guard = relative_guard * kernel.largest_rate();
    detail::CompensatedComplexSum sum;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double d = z.real() + g[k];
        const double denom = d * d + z.imag() * z.imag();
        if (std::sqrt(denom) < guard) {
            throw PoleProximity("Khat' evaluated within pole guard of -gamma_" +
                                std::to_string(k + 1) + " at z = " + detail::format_complex(z));
        }
        // 1/(z+g)^2 = conj(z+g)^2 / |z+g|^4
        const double re = (d * d - z.imag() * z.imag()) / (denom * denom);
        const double im = -2.0 * d * z.imag() / (denom * denom);
        sum.add(Complex(-c[k] * re, -c[k] * im));
    }
    return sum.value();
}

struct ApproxOptions {
    double delta = 0.1;            // sector half-gap: |arg z| < pi - delta
    double quadrature_tol = 1e-10; // absolute
};

namespace detail {

inline void require_sector(Complex z, double delta, const char* what) {
    if (z != Complex(0.0, 0.0) && !(std::abs(std::arg(z)) < std::numbers::pi - delta)) {
        throw DomainError(std::string(what) + ": |arg z| must be < pi - delta, got z = " +
                          format_complex(z));
    }
}

// int_L^inf A t^{-alpha} / (z + B t^beta)^p dt for p in {1, 2}.
//
// t = L x folds L into (A', B') = (A L^{1-alpha}, B L^beta); then u = x^beta,
// v = 1/u and s = v^r reduce the integral to
//   A'/(beta r) int_0^1 s^{(p-1)/r} / (z s^{1/r} + B')^p ds,
// which has no endpoint singularity.
inline Complex power_tail_integral(const PowerLawFamily& f, double lower, Complex z, int power,
                                   const quad::Options& options) {
    const double r = f.exponent_r();
    const double a_scaled = f.amplitude * std::pow(lower, 1.0 - f.alpha);
    const double b_scaled = f.scale * std::pow(lower, f.beta);
    const double inv_r = 1.0 / r;
    auto integrand = [&](double s) {
        const double sp = std::pow(s, inv_r);
        const Complex d = z * sp + b_scaled;
        if (power == 1) return Complex(1.0, 0.0) / d;
        return sp / (d * d);
    };
    const quad::Result res = quad::integrate(integrand, 0.0, 1.0, options);
    return a_scaled / (f.beta * r) * res.value;
}

} // namespace detail

/// h(z) = int_1^inf A dt / (t^alpha (z + B t^beta)), the integral surrogate for
/// the infinite-ladder Khat.
inline Complex integral_approx(const PowerLawFamily& family, Complex z,
                               const ApproxOptions& options = {}) {
    family.validate();
    detail::require_sector(z, options.delta, "integral_approx");
    quad::Options q;
    q.abs_tol = options.quadrature_tol;
    q.rel_tol = 1e-13;
    return detail::power_tail_integral(family, 1.0, z, 1, q);
}

/// int_0^inf dt / (t^r (e^{i phi} + t)), 0 < r < 1, |phi| < pi.
inline Complex sector_integral(double r, double phi, double tol = 1e-12) {
    if (!(r > 0.0 && r < 1.0)) throw DomainError("sector_integral requires 0 < r < 1");
    const Complex e = std::polar(1.0, phi);
    quad::Options q;
    q.abs_tol = tol;
    q.rel_tol = 1e-14;
    return quad::half_line_power([&](double t) { return Complex(1.0, 0.0) / (e + t); }, r, 1.0, q)
        .value;
}

/// Leading asymptotic term with the O(|z|^{-order}) remainder it carries.
struct LeadingTerm {
    Complex value;
    double remainder_order; // exponent of |z| in the absolute remainder
};

/// Large-|z| leading term of the infinite power-law Khat:
///   r < 1: A B^{r-1} / (beta |z|^r) * int_0^inf dt / (t^r (e^{i phi} + t)),
///   r = 1: (A/beta) ln|z/B + 1| / z,
/// both with an O(1/|z|) remainder.
inline LeadingTerm khat_asymptotic(const PowerLawFamily& family, Complex z,
                                   const ApproxOptions& options = {}) {
    family.validate();
    detail::require_sector(z, options.delta, "khat_asymptotic");
    if (z == Complex(0.0, 0.0)) throw DomainError("khat_asymptotic requires z != 0");
    const double r = family.exponent_r();
    const double A = family.amplitude;
    const double B = family.scale;
    if (std::abs(r - 1.0) < 1e-12) {
        return {(A / family.beta) * std::log(std::abs(z / B + 1.0)) / z, 1.0};
    }
    const double prefactor = A * std::pow(B, r - 1.0) / (family.beta * std::pow(std::abs(z), r));
    return {prefactor * sector_integral(r, std::arg(z), options.quadrature_tol * 1e-2), 1.0};
}

/// Infinite power-law kernel: explicit head k <= N plus an Euler-Maclaurin
/// (midpoint form) evaluation of the tail k > N,
///   sum_{k>N} f(k) = int_{N+1/2}^inf f + f'(N+1/2)/24 + O(f'''),
/// with f(t) = A t^{-alpha} / (z + B t^beta).
///
/// Valid for z to the right of the tail poles: Re z > -gamma_{N+1/2} / 2.
class PowerLawKernel {
  public:
    explicit PowerLawKernel(PowerLawFamily family, double tail_rel_tol = 1e-12)
        : family_(family), head_(materialize(family)), tail_rel_tol_(tail_rel_tol) {
        lower_ = static_cast<double>(family_.terms) + 0.5;
        tail_pole_ = family_.scale * std::pow(lower_, family_.beta);
    }

    const PowerLawFamily& family() const { return family_; }
    const ExponentialKernel& head() const { return head_; }
    double tail_start() const { return lower_; }

    /// Size of the first omitted Euler-Maclaurin term, 7/5760 |f'''(L)|,
    /// estimated from f'(L) and the algebraic decay rate.
    double tail_error_estimate(Complex z) const {
        const double n = family_.alpha + family_.beta + 1.0;
        return (7.0 / 5760.0) * std::abs(summand_slope(z)) * n * (n + 1.0) / (lower_ * lower_);
    }

    Complex tail(Complex z) const {
        check_domain(z);
        return detail::power_tail_integral(family_, lower_, z, 1, tail_options()) +
               summand_slope(z) / 24.0;
    }

    Complex tail_deriv(Complex z) const {
        check_domain(z);
        return -detail::power_tail_integral(family_, lower_, z, 2, tail_options()) +
               deriv_summand_slope(z) / 24.0;
    }

  private:
    quad::Options tail_options() const {
        quad::Options q;
        q.abs_tol = 0.0;
        q.rel_tol = tail_rel_tol_;
        q.max_panels = 20000;
        return q;
    }

    void check_domain(Complex z) const {
        if (!(z.real() > -0.5 * tail_pole_)) {
            throw DomainError("power-law tail evaluation requires Re z > -gamma_tail/2 (z = " +
                              detail::format_complex(z) + ")");
        }
    }

    // d/dt [A t^{-alpha} / (z + B t^beta)] at t = L.
    Complex summand_slope(Complex z) const {
        const double A = family_.amplitude;
        const double a = family_.alpha;
        const double b = family_.beta;
        const double t = lower_;
        const Complex d = z + tail_pole_;
        return -A * a * std::pow(t, -a - 1.0) / d -
               A * std::pow(t, -a) * family_.scale * b * std::pow(t, b - 1.0) / (d * d);
    }

    // d/dt [-A t^{-alpha} / (z + B t^beta)^2] at t = L.
    Complex deriv_summand_slope(Complex z) const {
        const double A = family_.amplitude;
        const double a = family_.alpha;
        const double b = family_.beta;
        const double t = lower_;
        const Complex d = z + tail_pole_;
        return A * a * std::pow(t, -a - 1.0) / (d * d) +
               2.0 * A * std::pow(t, -a) * family_.scale * b * std::pow(t, b - 1.0) / (d * d * d);
    }

    PowerLawFamily family_;
    ExponentialKernel head_;
    double tail_rel_tol_;
    double lower_ = 0.0;
    double tail_pole_ = 0.0;
};

inline Complex laplace(const PowerLawKernel& kernel, Complex z,
                       double relative_guard = default_pole_guard) {
    return laplace(kernel.head(), z, relative_guard) + kernel.tail(z);
}

inline Complex laplace_deriv(const PowerLawKernel& kernel, Complex z,
                             double relative_guard = default_pole_guard) {
    return laplace_deriv(kernel.head(), z, relative_guard) + kernel.tail_deriv(z);
}

} // namespace gpspectra
