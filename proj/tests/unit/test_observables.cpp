#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "golearn/fk_oracle.hpp"
#include "golearn/observables.hpp"

using namespace golearn;

namespace {

SdeSystem free_system(double x0, double beta = 1.0) {
    SdeSystem s;
    s.drift = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    s.beta = beta;
    s.x0 = {x0};
    return s;
}

ObservableSpec exit_spec(double lo, double hi, double t_cap) {
    ObservableSpec s;
    s.kind = ObservableKind::FirstExit;
    s.region = Region::interval(lo, hi);
    s.t_cap = t_cap;
    return s;
}

NoiseFn scripted_noise(std::vector<double> values) {
    auto it = std::make_shared<std::size_t>(0);
    return [values, it](std::span<double> xi) { xi[0] = *it < values.size() ? values[(*it)++] : 0.0; };
}

}  // namespace

TEST(Region, ContainsAndDescribe) {
    const Region r = Region::interval(-INFINITY, 1.0);
    EXPECT_TRUE(r.contains(Vector{1.0}));
    EXPECT_FALSE(r.contains(Vector{1.0001}));
    const Region e = Region::ellipse({0.0, 0.0}, {2.0, 1.0});
    EXPECT_TRUE(e.contains(Vector{1.9, 0.0}));
    EXPECT_FALSE(e.contains(Vector{0.0, 1.1}));
    EXPECT_NE(r.describe(), e.describe());
}

TEST(Observables, ExitExampleFromScriptedPath) {
    // dt = 0.1, sigma = sqrt(2): increments sqrt(0.2) xi give states 0, 0.5, 1.2.
    const double s = std::sqrt(0.2);
    const ObservableSpec spec = exit_spec(-INFINITY, 1.0, 10.0);
    const PathSample p = simulate_path(free_system(0.0), spec.stop_rule(), spec.t_cap, 0.1,
                                       scripted_noise({0.5 / s, 0.7 / s}), spec.tag());
    ASSERT_EQ(p.stop_index, 2u);
    EXPECT_NEAR(p.state(1)[0], 0.5, 1e-14);
    EXPECT_NEAR(p.state(2)[0], 1.2, 1e-14);
    EXPECT_NEAR(evaluate_functional(spec, p), 0.2, 1e-15);
}

TEST(Observables, InitiallyOutsideIsZero) {
    const ObservableSpec spec = exit_spec(-INFINITY, 1.0, 10.0);
    const PathSample p = simulate_path(free_system(1.5), spec.stop_rule(), spec.t_cap, 0.1,
                                       RngStream{1, 0}, spec.tag());
    EXPECT_EQ(evaluate_functional(spec, p), 0.0);
}

TEST(Observables, CappedPathGivesCap) {
    const ObservableSpec spec = exit_spec(-INFINITY, 1.0, 2.0);
    const PathSample p = simulate_path(free_system(0.0), spec.stop_rule(), spec.t_cap, 0.1,
                                       scripted_noise({}), spec.tag());
    EXPECT_TRUE(p.capped);
    EXPECT_NEAR(evaluate_functional(spec, p), 2.0, 1e-12);
}

TEST(Observables, SpecMismatch) {
    const ObservableSpec a = exit_spec(-INFINITY, 1.0, 2.0);
    const ObservableSpec b = exit_spec(-INFINITY, 0.5, 2.0);
    const PathSample p =
        simulate_path(free_system(0.0), a.stop_rule(), a.t_cap, 0.1, RngStream{1, 0}, a.tag());
    EXPECT_THROW(evaluate_functional(b, p), SpecMismatch);
}

TEST(Observables, TimeIntegralRiemannSum) {
    ObservableSpec spec;
    spec.kind = ObservableKind::TimeIntegral;
    spec.t_cap = 0.3;
    spec.integrand = [](std::span<const double> x) { return x[0]; };
    spec.integrand_name = "x";
    SdeSystem s = free_system(1.0);
    s.drift = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    const PathSample p = simulate_path(s, spec.stop_rule(), spec.t_cap, 0.1, scripted_noise({}), spec.tag());
    // states 1, 1.1, 1.2 on the left endpoints
    EXPECT_NEAR(evaluate_functional(spec, p), 0.1 * (1.0 + 1.1 + 1.2), 1e-14);
}

TEST(Observables, MomentsFromForcedValues) {
    const double v[] = {1.0, 2.0, 3.0};
    const MomentEstimate m = moments_from_values(v, 1);
    EXPECT_DOUBLE_EQ(m.mean, 2.0);
    EXPECT_DOUBLE_EQ(m.second_moment, 14.0 / 3.0);
    EXPECT_NEAR(m.variance, 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(m.capped_fraction, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(m.std_error_mean, std::sqrt(1.0 / 3.0), 1e-14);
}

TEST(Observables, MomentsOrderInvariant) {
    const double a[] = {0.5, 4.0, 2.25, 1.0};
    const double b[] = {2.25, 1.0, 4.0, 0.5};
    const MomentEstimate ma = moments_from_values(a), mb = moments_from_values(b);
    EXPECT_DOUBLE_EQ(ma.mean, mb.mean);
    EXPECT_DOUBLE_EQ(ma.second_moment, mb.second_moment);
}

TEST(Observables, BrownianExitMean) {
    const ObservableSpec spec = exit_spec(-1.0, 1.0, 100.0);
    const double dt = 1e-4;
    const MomentEstimate m = estimate_moments(spec, free_system(0.0), 2000, dt, 17);
    // discrete monitoring overshoot biases tau up by O(sqrt(dt))
    EXPECT_NEAR(m.mean, 0.5, 3.0 * m.std_error_mean + 2.0 * std::sqrt(dt));
    EXPECT_EQ(m.capped_fraction, 0.0);
}

TEST(Observables, DoubleWellMeanMatchesOracle) {
    const auto v = std::make_shared<DoubleWellPotential>(0.5);
    const ObservableSpec spec = exit_spec(-INFINITY, 1.0, 1e4);
    const double dt = 1e-3;
    const MomentEstimate m = estimate_moments(spec, SdeSystem::langevin(v, 1.0, {-1.0}), 1000, dt, 3);
    const Grid1D g = exit_grid_for(*v, 1.0, 1.0, 4001);
    const double oracle = solve_exit_moments(*v, 1.0, g).evaluated_at(-1.0).first;
    // discrete monitoring bias is O(sqrt(dt)) relative
    EXPECT_NEAR(m.mean, oracle, 3.0 * m.std_error_mean + std::sqrt(dt) * oracle);
}

TEST(Observables, FunctionalBoundedByCap) {
    const ObservableSpec spec = exit_spec(-0.5, 0.5, 0.2);
    const ObservableBatch b = sample_observable_batch(spec, QuadraticPotential(1.0), 1.0, {0.0}, 200, 1e-3, 4, false);
    for (double v : b.phi) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 0.2 + 1e-12);
    }
}

TEST(Martingale, ZeroJacobianGivesZero) {
    const ObservableSpec spec = exit_spec(-1.0, 1.0, 1.0);
    const PathSample p = simulate_path(free_system(0.0), spec.stop_rule(), 1.0, 1e-2, RngStream{1, 0}, spec.tag());
    const JacobianFn zero = [](std::span<const double>, Matrix& out) { out = Matrix(1, 2); };
    const Vector m = accumulate_martingale(p, zero, 2, std::sqrt(2.0));
    EXPECT_EQ(m, (Vector{0.0, 0.0}));
}

TEST(Martingale, ZeroNoiseGivesZero) {
    const PathSample p = simulate_path(free_system(0.0), nullptr, 1.0, 1e-1, scripted_noise({}));
    const JacobianFn one = [](std::span<const double>, Matrix& out) {
        out = Matrix(1, 1);
        out(0, 0) = 3.0;
    };
    EXPECT_EQ(accumulate_martingale(p, one, 1, std::sqrt(2.0))[0], 0.0);
}

TEST(Martingale, MissingNoise) {
    PathSample p = simulate_path(free_system(0.0), nullptr, 1.0, 1e-1, RngStream{1, 0});
    p.has_noise = false;
    p.noise.clear();
    EXPECT_THROW(accumulate_martingale(p, DoubleWellPotential(0.5), std::sqrt(2.0)), MissingNoise);
}

TEST(Martingale, LinearInIntegrand) {
    const PathSample p = simulate_path(free_system(0.2), nullptr, 1.0, 1e-2, RngStream{8, 0});
    const JacobianFn j1 = [](std::span<const double> x, Matrix& out) {
        out = Matrix(1, 1);
        out(0, 0) = std::sin(x[0]);
    };
    const JacobianFn j2 = [](std::span<const double> x, Matrix& out) {
        out = Matrix(1, 1);
        out(0, 0) = x[0] * x[0];
    };
    const JacobianFn comb = [&](std::span<const double> x, Matrix& out) {
        Matrix a, b;
        j1(x, a);
        j2(x, b);
        out = Matrix(1, 1);
        out(0, 0) = 2.5 * a(0, 0) + b(0, 0);
    };
    const double s = std::sqrt(2.0);
    const double lhs = accumulate_martingale(p, comb, 1, s)[0];
    const double rhs = 2.5 * accumulate_martingale(p, j1, 1, s)[0] + accumulate_martingale(p, j2, 1, s)[0];
    EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(Martingale, MeanZero) {
    const DoubleWellPotential v(0.5);
    const ObservableSpec spec = exit_spec(-INFINITY, 1.0, 1.0);
    const ObservableBatch b = sample_observable_batch(spec, v, 1.0, {-1.0}, 10000, 1e-2, 5, true);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        s += b.martingale(i, 0);
        s2 += b.martingale(i, 0) * b.martingale(i, 0);
    }
    const double n = static_cast<double>(b.size());
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean), 3.0 * se);
}

TEST(Martingale, BatchMatchesStoredPaths) {
    const DoubleWellPotential v(0.3);
    const ObservableSpec spec = exit_spec(-INFINITY, 1.0, 3.0);
    const auto handle = v.with_params(v.params());
    const SdeSystem sys = SdeSystem::langevin(handle, 1.0, {-1.0});
    const std::uint64_t seed = 21;
    const ObservableBatch b = sample_observable_batch(spec, v, 1.0, {-1.0}, 20, 1e-3, seed, true);
    for (std::size_t i = 0; i < 20; ++i) {
        const PathSample p = simulate_path(sys, spec.stop_rule(), spec.t_cap, 1e-3,
                                           RngStream::for_index(seed, i), spec.tag());
        EXPECT_EQ(b.phi[i], evaluate_functional(spec, p));
        EXPECT_NEAR(b.martingale(i, 0), accumulate_martingale(p, v, sys.sigma())[0], 1e-9);
    }
    EXPECT_EQ(b.fingerprint, v.fingerprint());
}
