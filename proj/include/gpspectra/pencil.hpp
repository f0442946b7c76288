#pragma once

// Per-mode symbol l(z) = z^2 + a^2 (1 - w Khat(z)), w = a^{-2(1-xi)}, and its
// companions f = 1 - w Khat, g = z^2/a^2.

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gpspectra/errors.hpp"
#include "gpspectra/kernel.hpp"

namespace gpspectra {

template <class K>
concept LaplaceKernel = requires(const K& kernel, Complex z) {
    { laplace(kernel, z) } -> std::convertible_to<Complex>;
    { laplace_deriv(kernel, z) } -> std::convertible_to<Complex>;
};

template <LaplaceKernel Kernel = ExponentialKernel>
class ModePencil {
  public:
    ModePencil(double frequency, double xi, Kernel kernel)
        : frequency_(frequency), xi_(xi), kernel_(std::move(kernel)) {
        if (!(frequency > 0.0) || !std::isfinite(frequency)) {
            throw DomainError("mode frequency a_n must be positive and finite");
        }
        if (!(xi > 0.0 && xi < 1.0)) throw DomainError("xi must lie strictly inside (0,1)");
        weight_ = std::pow(frequency, -2.0 * (1.0 - xi));
        coupling_ = std::pow(frequency, 2.0 * xi);
        if (!(weight_ > 0.0) || !std::isfinite(weight_) || !std::isfinite(coupling_)) {
            throw DomainError("weight a_n^{-2(1-xi)} is not a finite positive number");
        }
    }

    double frequency() const { return frequency_; }
    double xi() const { return xi_; }
    const Kernel& kernel() const { return kernel_; }
    /// w = a^{-2(1-xi)}
    double weight() const { return weight_; }
    /// a^2 w = a^{2 xi}
    double coupling() const { return coupling_; }

  private:
    double frequency_;
    double xi_;
    Kernel kernel_;
    double weight_ = 0.0;
    double coupling_ = 0.0;
};

/// (z - ia)(z + ia) - a^{2xi} Khat(z). The factored quadratic keeps the
/// cancellation near +-ia exact.
template <class Kernel>
Complex eval_symbol(const ModePencil<Kernel>& p, Complex z) {
    const double a = p.frequency();
    const double x = z.real();
    const double y = z.imag();
    const Complex quad(x * x - (y - a) * (y + a), 2.0 * x * y);
    return quad - p.coupling() * laplace(p.kernel(), z);
}

template <class Kernel>
Complex eval_symbol_deriv(const ModePencil<Kernel>& p, Complex z) {
    return 2.0 * z - p.coupling() * laplace_deriv(p.kernel(), z);
}

template <class Kernel>
Complex eval_f(const ModePencil<Kernel>& p, Complex z) {
    return 1.0 - p.weight() * laplace(p.kernel(), z);
}

template <class Kernel>
Complex eval_g(const ModePencil<Kernel>& p, Complex z) {
    const double a = p.frequency();
    return (z / a) * (z / a);
}

inline constexpr std::size_t poly_max = 64;

/// Ascending coefficients of P(z) = l(z) prod_k (z + gamma_k), degree N+2,
/// monic. Expanded by repeated convolution in Real arithmetic.
template <class Real = long double>
std::vector<Real> to_polynomial(const ModePencil<ExponentialKernel>& p) {
    const auto c = p.kernel().coeffs();
    const auto g = p.kernel().rates();
    const std::size_t n = c.size();
    if (n > poly_max) {
        throw DomainError("to_polynomial supports at most " + std::to_string(poly_max) +
                          " kernel terms, got " + std::to_string(n));
    }
    // Coefficients are bounded by (a^2 + 1 + a^{2xi} S1) prod (1 + gamma_k).
    double log_bound = std::log(p.frequency() * p.frequency() + 1.0 +
                                p.coupling() * p.kernel().coefficient_sum());
    for (double gk : g) log_bound += std::log1p(gk);
    const double log_max = std::numeric_limits<Real>::max_exponent10 * std::log(10.0);
    if (log_bound > 0.9 * log_max) {
        throw OverflowRisk("expanded polynomial coefficients may exceed the range of the "
                           "working precision (log-magnitude bound " +
                           std::to_string(log_bound) + ")");
    }

    auto multiply_linear = [](std::vector<Real>& poly, Real root_shift) {
        poly.push_back(Real(0));
        for (std::size_t i = poly.size() - 1; i > 0; --i) {
            poly[i] = poly[i - 1] + root_shift * poly[i];
        }
        poly[0] = root_shift * poly[0];
    };

    std::vector<Real> full{Real(1)};
    for (double gk : g) multiply_linear(full, Real(gk));

    const Real a = Real(p.frequency());
    const Real a2 = a * a;
    std::vector<Real> result(n + 3, Real(0));
    for (std::size_t i = 0; i <= n; ++i) {
        result[i] += a2 * full[i];
        result[i + 2] += full[i];
    }
    const Real coupling = Real(p.coupling());
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<Real> partial{Real(1)};
        for (std::size_t j = 0; j < n; ++j) {
            if (j != k) multiply_linear(partial, Real(g[j]));
        }
        const Real scale = coupling * Real(c[k]);
        for (std::size_t i = 0; i < partial.size(); ++i) result[i] -= scale * partial[i];
    }
    return result;
}

} // namespace gpspectra
