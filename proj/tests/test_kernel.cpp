#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "gpspectra/asymptotics.hpp"
#include "gpspectra/fit.hpp"
#include "gpspectra/kernel.hpp"

using namespace gpspectra;

namespace {

ExponentialKernel single(double c, double g) { return ExponentialKernel({c}, {g}); }

ExponentialKernel random_kernel(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> c(n), g(n);
    double rate = 0.5 + u(rng);
    for (std::size_t k = 0; k < n; ++k) {
        c[k] = 0.1 + u(rng);
        g[k] = rate;
        rate += 0.3 + 2.0 * u(rng);
    }
    return ExponentialKernel(c, g);
}

void expect_complex_near(Complex got, Complex want, double tol) {
    EXPECT_NEAR(got.real(), want.real(), tol);
    EXPECT_NEAR(got.imag(), want.imag(), tol);
}

} // namespace

TEST(ExponentialKernel, RejectsStructuralViolations) {
    EXPECT_THROW(ExponentialKernel({}, {}), DomainError);
    EXPECT_THROW(ExponentialKernel({1.0}, {1.0, 2.0}), DomainError);
    EXPECT_THROW(ExponentialKernel({0.0}, {1.0}), DomainError);
    EXPECT_THROW(ExponentialKernel({1.0}, {-1.0}), DomainError);
    EXPECT_THROW(ExponentialKernel({1.0, 1.0}, {2.0, 2.0}), DomainError);
    EXPECT_THROW(ExponentialKernel({1.0, 1.0}, {2.0, 1.0}), DomainError);
}

TEST(Materialize, HarmonicLadder) {
    const auto k = materialize(PowerLawFamily{1.0, 1.0, 1.0, 1.0, 3});
    ASSERT_EQ(k.size(), 3u);
    EXPECT_DOUBLE_EQ(k.coeffs()[0], 1.0);
    EXPECT_DOUBLE_EQ(k.coeffs()[1], 0.5);
    EXPECT_DOUBLE_EQ(k.coeffs()[2], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(k.rates()[0], 1.0);
    EXPECT_DOUBLE_EQ(k.rates()[1], 2.0);
    EXPECT_DOUBLE_EQ(k.rates()[2], 3.0);
}

TEST(Materialize, SquareRootLadder) {
    const auto k = materialize(PowerLawFamily{0.5, 2.0, 0.5, 1.0, 2});
    EXPECT_DOUBLE_EQ(k.coeffs()[0], 0.5);
    EXPECT_NEAR(k.coeffs()[1], 0.35355339059327373, 1e-16);
    EXPECT_DOUBLE_EQ(k.rates()[0], 2.0);
    EXPECT_DOUBLE_EQ(k.rates()[1], 4.0);
}

TEST(Materialize, RejectsInvalidFamilies) {
    EXPECT_THROW(materialize(PowerLawFamily{1.0, 1.0, 0.5, 0.4, 1}), DomainError);
    EXPECT_THROW(materialize(PowerLawFamily{1.0, 1.0, 1.0, 1.0, 0}), DomainError);
    EXPECT_THROW(materialize(PowerLawFamily{1.0, 1.0, 1.5, 1.0, 3}), DomainError);
    EXPECT_THROW(materialize(PowerLawFamily{-1.0, 1.0, 1.0, 1.0, 3}), DomainError);
}

TEST(PowerLawFamily, ExponentR) {
    EXPECT_DOUBLE_EQ((PowerLawFamily{1, 1, 0.5, 1.0, 1}).exponent_r(), 0.5);
    EXPECT_DOUBLE_EQ((PowerLawFamily{1, 1, 1.0, 1.0, 1}).exponent_r(), 1.0);
    EXPECT_DOUBLE_EQ((PowerLawFamily{1, 1, 0.5, 2.0, 1}).exponent_r(), 0.75);
}

TEST(TruncationTailBound, DominatesActualTail) {
    const PowerLawFamily f{1.0, 1.0, 1.0, 1.0, 10};
    EXPECT_DOUBLE_EQ(truncation_tail_bound(f), 0.1);
    // sum_{k>10} 1/k^2
    const double actual = 0.095166335681685746;
    EXPECT_LE(actual, truncation_tail_bound(f));
}

TEST(Admissibility, SingleTerm) {
    const auto r = admissibility_report(single(1.0, 2.0));
    EXPECT_DOUBLE_EQ(r.weighted_sum, 0.5);
    EXPECT_DOUBLE_EQ(r.coefficient_sum, 1.0);
    EXPECT_TRUE(r.admissible);
    EXPECT_EQ(r.tail_gap_proxy, 0.0);
}

TEST(Admissibility, SumExceedsOne) {
    const auto r = admissibility_report(ExponentialKernel({1.0, 1.0}, {1.0, 2.0}));
    EXPECT_DOUBLE_EQ(r.weighted_sum, 1.5);
    EXPECT_FALSE(r.admissible);
    EXPECT_DOUBLE_EQ(r.tail_gap_proxy, 1.0);
}

TEST(Admissibility, HarmonicLadder) {
    const auto r = admissibility_report(materialize(PowerLawFamily{1.0, 1.0, 1.0, 1.0, 3}));
    EXPECT_NEAR(r.weighted_sum, 49.0 / 36.0, 1e-15);
    EXPECT_NEAR(r.coefficient_sum, 11.0 / 6.0, 1e-15);
    EXPECT_FALSE(r.admissible);
    EXPECT_DOUBLE_EQ(r.tail_gap_proxy, 2.0);
}

TEST(Laplace, Examples) {
    expect_complex_near(laplace(single(1.0, 1.0), 0.0), 1.0, 1e-16);
    expect_complex_near(laplace(single(1.0, 1.0), Complex(0.0, 1.0)), Complex(0.5, -0.5), 1e-16);
    expect_complex_near(laplace(ExponentialKernel({1.0, 2.0}, {1.0, 3.0}), 1.0), 1.0, 1e-16);
}

TEST(Laplace, PoleGuard) {
    const auto k = single(1.0, 1.0);
    EXPECT_THROW(laplace(k, -1.0), PoleProximity);
    EXPECT_THROW(laplace(k, Complex(-1.0, 5e-14)), PoleProximity);
    EXPECT_THROW(laplace_deriv(k, -1.0 + 1e-14), PoleProximity);
    EXPECT_NO_THROW(laplace(k, -1.0 + 1e-12));
}

TEST(LaplaceDeriv, Examples) {
    expect_complex_near(laplace_deriv(single(1.0, 1.0), 0.0), -1.0, 1e-16);
    expect_complex_near(laplace_deriv(single(1.0, 1.0), Complex(0.0, 1.0)), Complex(0.0, 0.5), 1e-16);
    const auto k = ExponentialKernel({1.0, 2.0}, {1.0, 3.0});
    const Complex z(2.0, 3.0);
    const double h = 1e-5;
    const Complex fd = (laplace(k, z + h) - laplace(k, z - h)) / (2.0 * h);
    EXPECT_LT(std::abs(laplace_deriv(k, z) - fd), 1e-6);
}

TEST(LaplaceProperties, ConjugateSymmetry) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto k = random_kernel(rng, 1 + trial % 7);
        const Complex z(u(rng), u(rng));
        EXPECT_EQ(laplace(k, std::conj(z)), std::conj(laplace(k, z)));
        EXPECT_EQ(laplace_deriv(k, std::conj(z)), std::conj(laplace_deriv(k, z)));
    }
}

TEST(LaplaceProperties, ValueAtOriginIsWeightedSum) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const auto k = random_kernel(rng, 1 + trial % 12);
        const double s = k.weighted_sum();
        EXPECT_NEAR(laplace(k, 0.0).real(), s, 1e-14 * s);
        EXPECT_EQ(laplace(k, 0.0).imag(), 0.0);
    }
}

TEST(LaplaceProperties, PositiveDecreasingOnPositiveAxis) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const auto k = random_kernel(rng, 1 + trial % 9);
        double prev = laplace(k, 0.0).real();
        for (double x = 0.01; x < 1e4; x *= 1.3) {
            const Complex v = laplace(k, x);
            EXPECT_EQ(v.imag(), 0.0);
            EXPECT_GT(v.real(), 0.0);
            EXPECT_LT(v.real(), prev);
            prev = v.real();
        }
    }
}

TEST(LaplaceProperties, DerivativeMatchesFiniteDifferences) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> logr(0.0, 3.0);
    std::uniform_real_distribution<double> arg(-(std::numbers::pi - 0.1), std::numbers::pi - 0.1);
    const auto k = random_kernel(rng, 6);
    for (int trial = 0; trial < 100; ++trial) {
        const Complex z = std::polar(std::pow(10.0, logr(rng)), arg(rng));
        const double h = 1e-5 * std::max(1.0, std::abs(z)) * 1e-2;
        const Complex fd = (laplace(k, z + h) - laplace(k, z - h)) / (2.0 * h);
        const Complex an = laplace_deriv(k, z);
        EXPECT_LT(std::abs(an - fd), 1e-6 * std::abs(an)) << "z=" << z;
    }
}

TEST(IntegralApprox, HarmonicClosedForm) {
    const PowerLawFamily f{1.0, 1.0, 1.0, 1.0, 1};
    const Complex h = integral_approx(f, 1.0);
    EXPECT_NEAR(h.real(), std::log(2.0), 1e-12);
    EXPECT_EQ(h.imag(), 0.0);
}

TEST(IntegralApprox, RealArgumentGivesRealValue) {
    const PowerLawFamily f{1.0, 1.0, 0.5, 1.0, 1};
    for (double x : {0.3, 3.0, 300.0}) EXPECT_EQ(integral_approx(f, x).imag(), 0.0);
}

TEST(IntegralApprox, ReferenceValueOffAxis) {
    // int_1^inf dt / (sqrt(t) (z + t)) at z = 1 + i, high-precision reference
    const PowerLawFamily f{1.0, 1.0, 0.5, 1.0, 1};
    const Complex h = integral_approx(f, Complex(1.0, 1.0));
    expect_complex_near(h, Complex(1.4926938141128846, -0.25734566118552233), 1e-10);
}

TEST(IntegralApprox, ConjugateSymmetry) {
    const PowerLawFamily f{1.0, 2.0, 0.7, 1.5, 1};
    for (const Complex z : {Complex(1.0, 2.0), Complex(-3.0, 10.0), Complex(100.0, -40.0)}) {
        expect_complex_near(integral_approx(f, std::conj(z)), std::conj(integral_approx(f, z)), 1e-13);
    }
}

TEST(IntegralApprox, RejectsArgumentNearNegativeAxis) {
    const PowerLawFamily f{1.0, 1.0, 0.5, 1.0, 1};
    EXPECT_THROW(integral_approx(f, -10.0), DomainError);
    EXPECT_THROW(integral_approx(f, std::polar(5.0, std::numbers::pi - 0.05)), DomainError);
    EXPECT_NO_THROW(integral_approx(f, std::polar(5.0, std::numbers::pi - 0.2)));
}

TEST(PowerLawKernel, MatchesInfiniteSumReference) {
    // sum_{k>=1} 1 / (sqrt(k) (z + k)) and its derivative at z = 2 + 3i
    const PowerLawKernel k(PowerLawFamily{1.0, 1.0, 0.5, 1.0, 50});
    const Complex z(2.0, 3.0);
    expect_complex_near(laplace(k, z), Complex(1.2284725603670070, -0.45836373052647461), 1e-9);
    expect_complex_near(laplace_deriv(k, z), Complex(-0.056949623912374853, 0.12674872046440646), 1e-9);
    EXPECT_LT(k.tail_error_estimate(z), 1e-9);
}

TEST(PowerLawKernel, HeadSizeIndependence) {
    const PowerLawFamily small{1.0, 1.0, 0.5, 1.0, 200};
    const PowerLawFamily large{1.0, 1.0, 0.5, 1.0, 3000};
    const PowerLawKernel a(small);
    const PowerLawKernel b(large);
    for (const Complex z : {Complex(0.0, 10.0), Complex(5.0, 500.0), Complex(-50.0, 1e4)}) {
        EXPECT_LT(std::abs(laplace(a, z) - laplace(b, z)), 1e-11 * std::abs(laplace(b, z))) << z;
    }
}

TEST(PowerLawKernel, DerivativeMatchesFiniteDifferences) {
    const PowerLawKernel k(PowerLawFamily{1.0, 1.0, 0.5, 1.0, 100});
    for (const Complex z : {Complex(3.0, 40.0), Complex(0.0, 1000.0), Complex(-20.0, 5.0)}) {
        const double h = 1e-4 * std::max(1.0, std::abs(z)) * 1e-2;
        const Complex fd = (laplace(k, z + h) - laplace(k, z - h)) / (2.0 * h);
        EXPECT_LT(std::abs(laplace_deriv(k, z) - fd), 1e-6 * std::abs(fd)) << z;
    }
}

TEST(PowerLawKernel, RejectsPointsLeftOfTailPoles) {
    const PowerLawKernel k(PowerLawFamily{1.0, 1.0, 0.5, 1.0, 10});
    EXPECT_THROW(laplace(k, -20.0), DomainError);
}

TEST(KhatAsymptotic, LogarithmicCase) {
    const PowerLawFamily f{1.0, 1.0, 1.0, 1.0, 1};
    const auto lead = khat_asymptotic(f, 1000.0);
    EXPECT_NEAR(lead.value.real(), 6.9087547793152206e-3, 1e-17);
    EXPECT_EQ(lead.value.imag(), 0.0);
    EXPECT_EQ(lead.remainder_order, 1.0);
}

TEST(KhatAsymptotic, SectorIntegralOnImaginaryAxisIsTwoDOverI) {
    for (double r : {0.2, 0.5, 0.8}) {
        const Complex want = 2.0 * constant_D(r) / Complex(0.0, 1.0);
        const Complex got = sector_integral(r, std::numbers::pi / 2.0);
        EXPECT_LT(std::abs(got - want), 1e-10) << "r=" << r;
    }
}

TEST(KhatAsymptotic, ConjugateSymmetry) {
    const PowerLawFamily f{1.0, 1.0, 0.5, 1.0, 1};
    for (const Complex z : {Complex(3.0, 100.0), Complex(-50.0, 20.0)}) {
        expect_complex_near(khat_asymptotic(f, std::conj(z)).value, std::conj(khat_asymptotic(f, z).value), 1e-14);
    }
}

TEST(KhatAsymptotic, RelativeErrorDecreasesAlongImaginaryAxis) {
    const PowerLawFamily f{1.0, 1.0, 0.5, 1.0, 2000};
    const PowerLawKernel k(f);
    double prev = 1.0;
    for (double a : {1e2, 1e3, 1e4}) {
        const Complex z(0.0, a);
        const Complex exact = laplace(k, z);
        const double rel = std::abs(khat_asymptotic(f, z).value - exact) / std::abs(exact);
        EXPECT_LT(rel, prev) << "a=" << a;
        prev = rel;
    }
}

TEST(KhatAsymptotic, RejectsSectorViolation) {
    EXPECT_THROW(khat_asymptotic(PowerLawFamily{1.0, 1.0, 0.5, 1.0, 1}, -3.0), DomainError);
}

TEST(IntegralSurrogate, DistanceToKhatIsBoundedAlongRay) {
    // |z| |Khat(z) - h(z)| along arg z = pi/4 for the r = 1/2 family
    const PowerLawFamily f{1.0, 1.0, 0.5, 1.0, 4000};
    const PowerLawKernel k(f);
    std::vector<std::pair<double, double>> pts;
    for (double x : {1e1, 1e2, 1e3, 1e4}) {
        const Complex z = std::polar(x, std::numbers::pi / 4.0);
        const double scaled = x * std::abs(laplace(k, z) - integral_approx(f, z));
        EXPECT_LT(scaled, 1.0) << "x=" << x;
        pts.emplace_back(x, scaled);
    }
    EXPECT_LE(empirical_order(pts).slope, 0.1);
}
