#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "golearn/quadrature.hpp"

using namespace golearn;

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
    const GaussLegendreRule r = GaussLegendreRule::on(-1.0, 2.0, 5);
    ASSERT_EQ(r.nodes.size(), 5u);
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) s += r.weights[i] * std::pow(r.nodes[i], 9);
    EXPECT_NEAR(s, (std::pow(2.0, 10) - 1.0) / 10.0, 1e-10);
}

TEST(GaussLegendre, SelfNormalization) {
    const QuadraticPotential v(1.0);
    const double e = gauss_legendre_expect([](double) { return 1.0; }, v, 1.0, 200, {-10, 10});
    EXPECT_EQ(e, 1.0);
}

TEST(GaussLegendre, GaussianSecondMoment) {
    const QuadraticPotential v(1.0);
    EXPECT_NEAR(gauss_legendre_expect([](double x) { return x * x; }, v, 1.0, 200, {-10, 10}), 1.0, 1e-10);
}

TEST(GaussLegendre, OddSymmetry) {
    const QuadraticPotential v(1.0);
    EXPECT_NEAR(gauss_legendre_expect([](double x) { return x; }, v, 1.0, 200, {-10, 10}), 0.0, 1e-12);
}

TEST(GaussLegendre, FarFromMinimumStillNormalizes) {
    // weights are taken relative to the smallest node energy, so a distant well does not underflow
    const QuadraticPotential v(1.0, 100.0);
    EXPECT_NEAR(gauss_legendre_expect([](double) { return 1.0; }, v, 50.0, 50, {-1, 1}), 1.0, 1e-15);
}

TEST(GaussLegendre, ZeroMass) {
    const QuadraticPotential v(std::numeric_limits<double>::quiet_NaN());
    EXPECT_THROW(gauss_legendre_expect([](double) { return 1.0; }, v, 1.0, 50, {-1, 1}), ZeroMass);
}

TEST(GibbsQuadrature, WeightsNormalized) {
    const DoubleWellPotential v(0.3);
    const auto b = gibbs_support(v, 1.0);
    EXPECT_LT(b.first, -1.5);
    EXPECT_GT(b.second, 1.0);
    const WeightedStates w = gibbs_quadrature(v, 1.0, 200, b);
    double s = 0.0;
    for (double x : w.weights) s += x;
    EXPECT_NEAR(s, 1.0, 1e-12);
}
