#include "ctmdp/expcalc.h"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace ctmdp;

namespace {

// Adaptive Simpson quadrature: the independent oracle for ep_integrate.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

double quad(const std::function<double(double)>& f, double a, double b) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-13, 50);
}

ExpPoly random_poly(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> c(-2.0, 2.0), d(0.1, 4.0);
    std::vector<ExpTerm> terms;
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) terms.push_back({c(rng), static_cast<int>(rng() % 4), d(rng)});
    return ExpPoly(terms);
}

}  // namespace

TEST(ExpCalc, AddMergesAndCancels) {
    EXPECT_TRUE(ep_add(ExpPoly::term(1, 0, 1), ExpPoly::term(-1, 0, 1)).is_zero());
    const ExpPoly two = ep_add(ExpPoly::term(1, 0, 1), ExpPoly::term(1, 1, 1));
    EXPECT_EQ(two.terms().size(), 2u);
    const ExpPoly merged = ep_add(ExpPoly::term(1, 2, 3), ExpPoly::term(2, 2, 3));
    ASSERT_EQ(merged.terms().size(), 1u);
    EXPECT_DOUBLE_EQ(merged.terms()[0].coeff, 3.0);
}

TEST(ExpCalc, AddEvaluatesPointwise) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const ExpPoly a = random_poly(rng), b = random_poly(rng);
        for (double t : {0.0, 0.3, 1.0, 2.5}) EXPECT_NEAR(ep_add(a, b)(t), a(t) + b(t), 1e-12);
    }
}

TEST(ExpCalc, MulExp) {
    EXPECT_EQ(ep_mul_exp(ExpPoly::term(1, 0, 1), 1, 0), ExpPoly::term(1, 0, 2));
    EXPECT_EQ(ep_mul_exp(ExpPoly::term(1, 0, 0), 0, 1), ExpPoly::term(1, 1, 0));
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const ExpPoly a = random_poly(rng);
        const double decay = 0.5 * static_cast<double>(rng() % 5);
        const int k = static_cast<int>(rng() % 3);
        for (double t : {0.1, 0.7, 1.9}) {
            EXPECT_NEAR(ep_mul_exp(a, decay, k)(t), a(t) * std::pow(t, k) * std::exp(-decay * t), 1e-12);
        }
    }
}

TEST(ExpCalc, IntegratePaperValues) {
    EXPECT_NEAR(ep_integrate(ExpPoly::exp_density(3), TimeInterval(0, kInfinity)), 1.0, 1e-12);
    EXPECT_NEAR(ep_integrate(ExpPoly::exp_density(2), TimeInterval(0.2, 1)), std::exp(-0.4) - std::exp(-2.0), 1e-12);
    EXPECT_NEAR(ep_integrate(ExpPoly::exp_density(2), TimeInterval(0.2, 1)), 0.53, 0.005);
    EXPECT_NEAR(ep_integrate(ExpPoly::term(1, 1, 1), TimeInterval(0, 1)), 1.0 - 2.0 * std::exp(-1.0), 1e-12);
    EXPECT_NEAR(ep_integrate(ExpPoly::term(1, 1, 1), TimeInterval(0, 1)), 0.264, 0.0005);
}

TEST(ExpCalc, DivergentIntegral) {
    EXPECT_THROW(ep_integrate(ExpPoly::term(1, 0, 0), TimeInterval(0, kInfinity)), DivergentIntegral);
    EXPECT_NEAR(ep_integrate(ExpPoly::term(2, 0, 0), TimeInterval(1, 4)), 6.0, 1e-12);
}

TEST(ExpCalc, IntervalValidation) {
    EXPECT_THROW(TimeInterval(2, 1), std::invalid_argument);
    EXPECT_THROW(TimeInterval(-1, 1), std::invalid_argument);
    EXPECT_NO_THROW(TimeInterval(1, 1));
}

TEST(ExpCalc, AdditiveOverSplits) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 300; ++i) {
        const ExpPoly a = random_poly(rng);
        double x = u(rng), y = u(rng), z = u(rng);
        if (x > y) std::swap(x, y);
        if (y > z) std::swap(y, z);
        if (x > y) std::swap(x, y);
        const double whole = ep_integrate(a, TimeInterval(x, z));
        EXPECT_NEAR(whole, ep_integrate(a, TimeInterval(x, y)) + ep_integrate(a, TimeInterval(y, z)),
                    1e-12 * std::max(1.0, std::abs(whole)));
    }
}

TEST(ExpCalc, IntervalMassMatchesDensityIntegral) {
    EXPECT_NEAR(interval_mass(1, TimeInterval(0.2, 1)), 0.45, 0.005);
    EXPECT_NEAR(interval_mass(4, TimeInterval(0.2, 1)), 0.43, 0.005);
    for (double rate : {0.5, 1.0, 3.0, 7.0}) {
        EXPECT_DOUBLE_EQ(interval_mass(rate, TimeInterval(0, kInfinity)), 1.0);
        for (auto i : {TimeInterval(0, 1), TimeInterval(0.2, 1), TimeInterval(0.5, kInfinity), TimeInterval(1e-6, 2e-6)}) {
            EXPECT_NEAR(interval_mass(rate, i), ep_integrate(ExpPoly::exp_density(rate), i), 1e-12);
        }
    }
}

TEST(ExpCalc, AgreesWithQuadrature) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int i = 0; i < 300; ++i) {
        const ExpPoly a = random_poly(rng);
        double lo = u(rng), hi = u(rng);
        if (lo > hi) std::swap(lo, hi);
        EXPECT_NEAR(ep_integrate(a, TimeInterval(lo, hi)), quad([&](double t) { return a(t); }, lo, hi), 1e-9);
    }
}

TEST(ExpCalc, ConvolutionAgreesWithQuadrature) {
    // (f * rate e^{-rate t})(t) restricted to jumps after `lower`.
    std::mt19937_64 rng(5);
    for (int i = 0; i < 40; ++i) {
        std::vector<ExpTerm> terms{{1.0 + static_cast<double>(rng() % 3), static_cast<int>(rng() % 2),
                                    1.0 + static_cast<double>(rng() % 3)}};
        const ExpPoly f(terms);
        const double rate = 1.0 + static_cast<double>(rng() % 4);
        const ExpPoly g = ep_convolve_exp(f, rate, 0.0);
        for (double t : {0.4, 1.3}) {
            const double expected = quad([&](double s) { return f(s) * rate * std::exp(-rate * (t - s)); }, 0.0, t);
            EXPECT_NEAR(g(t), expected, 1e-9);
        }
    }
}
