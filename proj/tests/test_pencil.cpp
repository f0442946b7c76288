#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gpspectra/pencil.hpp"

using namespace gpspectra;

namespace {

ModePencil<> cubic() { return ModePencil<>(10.0, 0.5, ExponentialKernel({1.0}, {2.0})); }

template <class Real>
Complex horner(const std::vector<Real>& coeffs, Complex z) {
    Complex acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + static_cast<double>(*it);
    return acc;
}

ModePencil<> random_pencil(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> c(n), g(n);
    double rate = 0.5 + u(rng);
    for (std::size_t k = 0; k < n; ++k) {
        g[k] = rate;
        c[k] = 0.2 * rate * u(rng) / static_cast<double>(n);
        rate *= 1.5 + 2.0 * u(rng);
    }
    const double a = std::pow(10.0, 1.0 + u(rng));
    return ModePencil<>(a, 0.25 + 0.5 * u(rng), ExponentialKernel(c, g));
}

} // namespace

TEST(ModePencil, DerivedScalars) {
    const auto p = cubic();
    EXPECT_DOUBLE_EQ(p.weight(), 0.1);
    EXPECT_DOUBLE_EQ(p.coupling(), 10.0);
    const ModePencil<> q(100.0, 0.25, ExponentialKernel({1.0}, {1.0}));
    EXPECT_NEAR(q.weight(), std::pow(100.0, -1.5), 1e-18);
    EXPECT_NEAR(q.coupling(), 10.0, 1e-14);
}

TEST(ModePencil, RejectsInvalidParameters) {
    const ExponentialKernel k({1.0}, {2.0});
    EXPECT_THROW(ModePencil<>(0.0, 0.5, k), DomainError);
    EXPECT_THROW(ModePencil<>(-1.0, 0.5, k), DomainError);
    EXPECT_THROW(ModePencil<>(10.0, 0.0, k), DomainError);
    EXPECT_THROW(ModePencil<>(10.0, 1.0, k), DomainError);
}

TEST(Symbol, CubicExamples) {
    const auto p = cubic();
    const Complex at_ia = eval_symbol(p, Complex(0.0, 10.0));
    const Complex want = -10.0 / Complex(2.0, 10.0);
    EXPECT_NEAR(at_ia.real(), want.real(), 1e-15);
    EXPECT_NEAR(at_ia.imag(), want.imag(), 1e-15);
    EXPECT_NEAR(at_ia.real(), -0.19230769230769232, 1e-15);
    EXPECT_NEAR(at_ia.imag(), 0.96153846153846156, 1e-15);
    EXPECT_EQ(eval_symbol(p, 0.0), Complex(95.0, 0.0));
}

TEST(Symbol, CompanionsAtReferencePoints) {
    const auto p = cubic();
    EXPECT_EQ(eval_g(p, Complex(0.0, 10.0)), Complex(-1.0, 0.0));
    EXPECT_NEAR(eval_f(p, 0.0).real(), 0.95, 1e-16);
    EXPECT_EQ(eval_f(p, 0.0).imag(), 0.0);
}

TEST(Symbol, DecomposesIntoCompanions) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_pencil(rng, 1 + trial % 6);
        const Complex z(u(rng), u(rng));
        const double a2 = p.frequency() * p.frequency();
        const Complex lhs = eval_symbol(p, z);
        const Complex rhs = a2 * (eval_f(p, z) + eval_g(p, z));
        EXPECT_LE(std::abs(lhs - rhs), 1e-12 * (std::abs(lhs) + a2)) << "z=" << z;
    }
}

TEST(Symbol, DerivativeAtOrigin) {
    // 0 - 10 * (-1/4)
    const Complex d = eval_symbol_deriv(cubic(), 0.0);
    EXPECT_DOUBLE_EQ(d.real(), 2.5);
    EXPECT_EQ(d.imag(), 0.0);
}

TEST(Symbol, DerivativeMatchesFiniteDifferences) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_pencil(rng, 1 + trial % 5);
        const Complex z(u(rng), u(rng) + 25.0);
        const double h = 1e-5;
        const Complex fd = (eval_symbol(p, z + h) - eval_symbol(p, z - h)) / (2.0 * h);
        const Complex an = eval_symbol_deriv(p, z);
        EXPECT_LE(std::abs(an - fd), 1e-6 * std::max(1.0, std::abs(an))) << "z=" << z;
    }
}

TEST(Symbol, ConjugateSymmetric) {
    const auto p = cubic();
    for (const Complex z : {Complex(1.0, 3.0), Complex(-4.0, 9.5), Complex(0.3, -20.0)}) {
        EXPECT_EQ(eval_symbol(p, std::conj(z)), std::conj(eval_symbol(p, z)));
    }
}

TEST(Polynomial, CubicCoefficients) {
    // (z^2 + 100)(z + 2) - 10
    const auto c = to_polynomial(cubic());
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c[0], 190.0L);
    EXPECT_EQ(c[1], 100.0L);
    EXPECT_EQ(c[2], 2.0L);
    EXPECT_EQ(c[3], 1.0L);
}

TEST(Polynomial, VietaSums) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_pencil(rng, 1 + trial % 8);
        const auto c = to_polynomial(p);
        const std::size_t n = p.kernel().size();
        ASSERT_EQ(c.size(), n + 3);
        EXPECT_EQ(c.back(), 1.0L);
        // z^{N+1} coefficient is sum of gamma_k; the Khat part only enters at degree <= N-1
        long double rate_sum = 0.0L;
        for (double g : p.kernel().rates()) rate_sum += g;
        EXPECT_NEAR(static_cast<double>(c[n + 1]), static_cast<double>(rate_sum), 1e-12 * static_cast<double>(rate_sum));
    }
}

TEST(Polynomial, MatchesSymbolTimesDenominator) {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_pencil(rng, 1 + trial % 8);
        const auto c = to_polynomial(p);
        const Complex z(u(rng), u(rng));
        Complex denom = 1.0;
        for (double g : p.kernel().rates()) denom *= z + g;
        const Complex want = eval_symbol(p, z) * denom;
        const Complex got = horner(c, z);
        EXPECT_LE(std::abs(got - want), 1e-10 * std::max(1.0, std::abs(want))) << "z=" << z;
    }
}

TEST(Polynomial, RejectsTooManyTerms) {
    std::vector<double> c(poly_max + 1, 1e-3), g(poly_max + 1);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = 1.0 + static_cast<double>(k);
    const ModePencil<> p(10.0, 0.5, ExponentialKernel(c, g));
    EXPECT_THROW(to_polynomial(p), DomainError);
}

TEST(Polynomial, FlagsCoefficientOverflowRisk) {
    std::vector<double> c(10, 1.0), g(10);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = 1e40 * (1.0 + static_cast<double>(k));
    const ModePencil<> p(10.0, 0.5, ExponentialKernel(c, g));
    EXPECT_THROW(to_polynomial<double>(p), OverflowRisk);
    EXPECT_NO_THROW(to_polynomial<long double>(p));
}
