#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "golearn/info_metrics.hpp"
#include "golearn/quadrature.hpp"

using namespace golearn;

namespace {

DriftFn constant_drift(double c) {
    return [c](std::span<const double>, std::span<double> out) { out[0] = c; };
}

WeightedStates points(std::initializer_list<double> xs) {
    StateSet s(1);
    for (double x : xs) s.push_back(std::span<const double>(&x, 1));
    return WeightedStates::uniform(s);
}

/// Exact i.i.d. Gibbs samples by rejection from a uniform proposal on [lo, hi].
StateSet gibbs_rejection(const PotentialModel& v, double beta, double lo, double hi, std::size_t n,
                         std::uint64_t seed) {
    double vmin = INFINITY;
    for (int i = 0; i <= 10000; ++i) vmin = std::min(vmin, v.value(Vector{lo + (hi - lo) * i / 10000.0}));
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    StateSet out(1);
    while (out.size() < n) {
        const double x = lo + (hi - lo) * u(eng);
        if (u(eng) < std::exp(-beta * (v.value(std::span<const double>(&x, 1)) - vmin))) {
            out.push_back(std::span<const double>(&x, 1));
        }
    }
    return out;
}

}  // namespace

TEST(Rer, IdenticalDriftsGiveZero) {
    const DoubleWellPotential v(0.5);
    const WeightedStates pi = gibbs_quadrature(v, 1.0, 200, gibbs_support(v, 1.0));
    EXPECT_EQ(relative_entropy_rate(v, v, pi, 1.0), 0.0);
}

TEST(Rer, ConstantGap) {
    const double c = 0.7;
    EXPECT_NEAR(relative_entropy_rate(constant_drift(c), constant_drift(0.0), points({-1, 0, 2}), std::sqrt(2.0)),
                c * c / 4.0, 1e-15);
}

TEST(Rer, UnnormalizedWeights) {
    WeightedStates pi = points({0.0, 1.0});
    pi.weights = {0.5, 0.6};
    EXPECT_THROW(relative_entropy_rate(constant_drift(1), constant_drift(0), pi, 1.0), UnnormalizedDensity);
}

TEST(Rer, QuadratureMatchesMonteCarlo) {
    const auto ref = std::make_shared<DoubleWellPotential>(0.5);
    const DoubleWellPotential sur(0.1);
    const WeightedStates pi = gibbs_quadrature(*ref, 1.0, 200, gibbs_support(*ref, 1.0));
    const double quad = relative_entropy_rate(*ref, sur, pi, 1.0);
    const StateSet st = gibbs_rejection(*ref, 1.0, -3.0, 2.5, 100000, 4);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < st.size(); ++i) {
        const double u = ref->drift(st[i])[0] - sur.drift(st[i])[0];
        const double h = 0.25 * u * u;
        s += h;
        s2 += h * h;
    }
    const double n = static_cast<double>(st.size());
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, quad, 3.0 * se);
}

TEST(PathKl, IdenticalDriftsGiveZero) {
    const auto v = std::make_shared<DoubleWellPotential>(0.5);
    const SdeSystem s = SdeSystem::langevin(v, 1.0, {-1.0});
    EXPECT_EQ(path_kl_mc(s, s.drift, 1.0, 1e-2, 10, 1).value, 0.0);
}

TEST(PathKl, ConstantGapIsDeterministic) {
    SdeSystem s;
    s.drift = constant_drift(1.0);
    s.beta = 1.0;
    s.x0 = {0.0};
    const PathKlEstimate e = path_kl_mc(s, constant_drift(0.4), 2.0, 1e-2, 50, 3);
    EXPECT_NEAR(e.value, 2.0 * 0.36 / 4.0, 1e-12);
    EXPECT_NEAR(e.std_error, 0.0, 1e-12);
}

TEST(PathKl, StationaryStartMatchesRate) {
    const auto ref = std::make_shared<DoubleWellPotential>(0.5);
    const DoubleWellPotential sur(0.0);
    const SdeSystem s = SdeSystem::langevin(ref, 1.0, {-1.0});
    const StateSet start = gibbs_rejection(*ref, 1.0, -3.0, 2.5, 500, 6);
    const double t = 5.0;
    const PathKlEstimate e = path_kl_mc(
        s, [&](std::span<const double> x, std::span<double> out) { sur.drift(x, out); }, t, 1e-3, start, 8);
    const WeightedStates pi = gibbs_quadrature(*ref, 1.0, 200, gibbs_support(*ref, 1.0));
    EXPECT_NEAR(e.value, t * relative_entropy_rate(*ref, sur, pi, 1.0), 3.0 * e.std_error);
}

TEST(GibbsKl, IdenticalIsZero) {
    const DoubleWellPotential v(0.3);
    EXPECT_NEAR(gibbs_kl(v, v, 1.0, {-4, 3}), 0.0, 1e-14);
}

TEST(GibbsKl, GaussianClosedForm) {
    const double beta = 1.5, t1 = 1.0, t2 = 3.0;
    const double v1 = 1.0 / (beta * t1), v2 = 1.0 / (beta * t2);
    const double exact = 0.5 * (v1 / v2 - 1.0 + std::log(v2 / v1));
    EXPECT_NEAR(gibbs_kl(QuadraticPotential(t1), QuadraticPotential(t2), beta, {-10, 10}), exact, 1e-8);
}

TEST(GibbsKl, AsymmetricForDoubleWell) {
    const DoubleWellPotential a(0.0), b(1.0);
    const double f = gibbs_kl(a, b, 1.0, {-4, 3}), r = gibbs_kl(b, a, 1.0, {-4, 3});
    EXPECT_GT(f, 0.0);
    EXPECT_GT(r, 0.0);
    EXPECT_GT(std::abs(f - r), 0.0);
}

TEST(Bounds, GoErrorBound) {
    EXPECT_EQ(go_error_bound(3.0, 4.0, 0.0), 0.0);
    EXPECT_NEAR(go_error_bound(2.0, 2.0, 1.0), 2.0 * std::sqrt(2.0), 1e-15);
    EXPECT_THROW(go_error_bound(-1.0, 1.0, 1.0), NegativeInput);
    EXPECT_THROW(go_error_bound(1.0, 1.0, -1.0), NegativeInput);
    EXPECT_LE(go_error_bound(1.0, 2.0, 0.3), go_error_bound(1.5, 2.0, 0.3));
    EXPECT_LE(go_error_bound(1.0, 2.0, 0.3), go_error_bound(1.0, 2.5, 0.3));
    EXPECT_LE(go_error_bound(1.0, 2.0, 0.3), go_error_bound(1.0, 2.0, 0.4));
}

TEST(Bounds, CkpBound) {
    EXPECT_EQ(ckp_bound(10.0, 0.0), 0.0);
    EXPECT_EQ(ckp_bound(std::numeric_limits<double>::infinity(), 0.0), 0.0);
    EXPECT_NEAR(ckp_bound(10.0, 0.5), 10.0, 1e-14);
}

TEST(Bounds, CkpDominatesGoWhenMomentsBelowCap) {
    const double cap = 5.0, m2 = 4.0, m2t = 9.0, kl = 0.2;
    ASSERT_LE(m2 + m2t, cap * cap);
    EXPECT_GE(ckp_bound(cap, kl), go_error_bound(m2, m2t, kl));
}
