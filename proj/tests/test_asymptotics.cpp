#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "gpspectra/asymptotics.hpp"
#include "gpspectra/complex_spectrum.hpp"
#include "gpspectra/fit.hpp"

using namespace gpspectra;

TEST(ConstantD, HalfIsSymmetric) {
    const Complex d = constant_D(0.5);
    const double want = std::numbers::pi / (2.0 * std::numbers::sqrt2);
    EXPECT_NEAR(d.real(), want, 1e-15);
    EXPECT_NEAR(d.imag(), want, 1e-15);
    EXPECT_NEAR(d.real(), 1.1107207345395915, 1e-15);
}

TEST(ConstantD, ReflectionSwapsParts) {
    // D(1-r) = i conj(D(r))
    for (double r : {0.1, 0.3, 0.45}) {
        const Complex lhs = constant_D(1.0 - r);
        const Complex rhs = Complex(0.0, 1.0) * std::conj(constant_D(r));
        EXPECT_NEAR(lhs.real(), rhs.real(), 1e-13);
        EXPECT_NEAR(lhs.imag(), rhs.imag(), 1e-13);
    }
}

TEST(ConstantD, RejectsOutOfRange) {
    EXPECT_THROW(constant_D(0.0), DomainError);
    EXPECT_THROW(constant_D(1.0), DomainError);
}

TEST(ConstantD, QuadratureAgreesWithClosedForm) {
    for (double r = 0.05; r < 0.96; r += 0.05) {
        const auto q = constant_D_quadrature(r);
        EXPECT_LT(q.deviation, 1e-8) << "r=" << r;
        EXPECT_NEAR(q.i1, std::numbers::pi / (2.0 * std::cos(std::numbers::pi * r / 2.0)), 1e-8) << "r=" << r;
    }
}

TEST(PredictFiniteSum, Examples) {
    const auto p1 = predict_finite_sum(10.0, 0.5, 1.0);
    EXPECT_NEAR(p1.value.real(), -0.05, 1e-16);
    EXPECT_EQ(p1.value.imag(), 10.0);
    EXPECT_EQ(p1.tag, RegimeTag::finite_sum_xi_eq_half);
    EXPECT_EQ(p1.remainder_order, 1.0);

    const auto p2 = predict_finite_sum(100.0, 0.5, 0.2);
    EXPECT_NEAR(p2.value.real(), -1e-3, 1e-18);
    EXPECT_EQ(p2.value.imag(), 100.0);

    const auto p3 = predict_finite_sum(10.0, 0.25, 0.0);
    EXPECT_EQ(p3.value, Complex(0.0, 10.0));
    EXPECT_EQ(p3.tag, RegimeTag::finite_sum_xi_lt_half);
    EXPECT_EQ(predict_finite_sum(10.0, 0.75, 1.0).tag, RegimeTag::finite_sum_xi_gt_half);

    EXPECT_THROW(predict_finite_sum(10.0, 0.5, -1.0), DomainError);
    EXPECT_THROW(predict_finite_sum(0.0, 0.5, 1.0), DomainError);
}

TEST(PredictFiniteSum, ErrorShrinksAgainstComputedPair) {
    const ExponentialKernel k({0.4, 0.3}, {1.0, 2.5});
    for (double xi : {0.25, 0.5, 0.75}) {
        std::vector<std::pair<double, double>> err;
        for (double a : {1e2, 1e3, 1e4, 1e5}) {
            const ModePencil<> p(a, xi, k);
            const auto fp = fixed_point_pair(p);
            const auto pred = predict_finite_sum(a, xi, k.coefficient_sum());
            err.emplace_back(a, std::abs(fp.plus.real() - pred.value.real()));
        }
        const auto fit = empirical_order(err);
        // absolute error in Re is O(a^{-2(1-xi)}) relative to the leading term
        EXPECT_LT(fit.slope, -2.0 * (1.0 - xi) - 0.5) << "xi=" << xi;
    }
}

TEST(PredictPowerLaw, LogarithmicCase) {
    const PowerLawFamily f{1.0, 1.0, 1.0, 1.0, 1};
    const double a = std::exp(10.0);
    const auto p = predict_power_law(a, 0.5, f);
    EXPECT_NEAR(p.value.real(), -0.5 * 10.0 / a, 1e-18);
    EXPECT_EQ(p.value.imag(), a);
    EXPECT_EQ(p.tag, RegimeTag::power_r_eq_one);
}

TEST(PredictPowerLaw, SquareRootCase) {
    const PowerLawFamily f{1.0, 1.0, 0.5, 1.0, 1};
    const auto p = predict_power_law(100.0, 0.5, f);
    EXPECT_NEAR(p.value.real(), -0.11107207345395915, 1e-15);
    EXPECT_NEAR(p.value.imag(), 100.0 - 0.11107207345395915, 1e-13);
    EXPECT_EQ(p.tag, RegimeTag::power_r_in_half_one);
    EXPECT_EQ(predict_power_law(100.0, 0.5, PowerLawFamily{1.0, 1.0, 0.2, 1.0, 1}).tag,
              RegimeTag::power_r_lt_half);
}

TEST(ClassifyRegime, Examples) {
    EXPECT_EQ(classify_regime(0.5, 1.0), Regime::tends_to_axis);
    EXPECT_EQ(classify_regime(0.75, 0.5), Regime::constant_offset);
    EXPECT_EQ(classify_regime(0.3, 0.5), Regime::tends_to_axis);
    EXPECT_EQ(classify_regime(0.9, 0.5), Regime::unbounded_decay);
    EXPECT_EQ(classify_regime(0.75 + 1e-13, 0.5), Regime::constant_offset);
    EXPECT_THROW(classify_regime(1.0, 0.5), DomainError);
    EXPECT_THROW(classify_regime(0.5, 1.5), DomainError);
    EXPECT_EQ(to_string(Regime::unbounded_decay), "unbounded_decay");
}

TEST(EmpiricalOrder, RecoversExactPowerLaw) {
    std::vector<std::pair<double, double>> pts;
    for (double a : {1e1, 1e2, 1e3, 1e4}) pts.emplace_back(a, 3.0 / (a * a));
    const auto fit = empirical_order(pts);
    EXPECT_NEAR(fit.slope, -2.0, 1e-12);
    EXPECT_LT(fit.half_width, 1e-10);
    EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-10);
    EXPECT_EQ(fit.points, 4u);
    EXPECT_FALSE(fit.below_floor);
}

TEST(EmpiricalOrder, RejectsInsufficientData) {
    EXPECT_THROW(empirical_order(std::vector<std::pair<double, double>>{{1.0, 1.0}, {10.0, 0.1}, {100.0, 0.01}}),
                 DomainError);
    EXPECT_THROW(empirical_order(std::vector<std::pair<double, double>>{{1.0, 1.0}, {2.0, 0.5}, {5.0, 0.2}, {9.0, 0.1}}),
                 DomainError);
    EXPECT_THROW(empirical_order(std::vector<std::pair<double, double>>{{1.0, 1.0}, {10.0, -1.0}, {100.0, 0.01}, {1e3, 1e-3}}),
                 DomainError);
}

TEST(EmpiricalOrder, ZeroErrorIsBelowFloor) {
    const auto fit = empirical_order(std::vector<std::pair<double, double>>{{1.0, 1.0}, {10.0, 0.0}, {100.0, 0.01}, {1e3, 1e-3}});
    EXPECT_TRUE(fit.below_floor);
}
