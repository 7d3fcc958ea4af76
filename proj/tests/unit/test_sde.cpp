#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <set>

#include "golearn/sde.hpp"

using namespace golearn;

namespace {

SdeSystem linear_system(double a, double beta, double x0) {
    SdeSystem s;
    s.drift = [a](std::span<const double> x, std::span<double> out) { out[0] = a * x[0]; };
    s.beta = beta;
    s.dim = 1;
    s.x0 = {x0};
    return s;
}

NoiseFn zero_noise() {
    return [](std::span<double> xi) {
        for (double& v : xi) v = 0.0;
    };
}

}  // namespace

TEST(Sde, SigmaSquaredTimesBetaIsTwo) {
    for (double beta : {0.1, 1.0, 2.5, 40.0}) {
        const SdeSystem s = linear_system(0.0, beta, 0.0);
        EXPECT_NEAR(s.sigma() * s.sigma() * beta, 2.0, 2e-12);
    }
}

TEST(Sde, ValidateRejectsBadConfig) {
    SdeSystem s = linear_system(-1.0, 1.0, 0.0);
    s.beta = 0.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = linear_system(-1.0, 1.0, 0.0);
    s.x0 = {0.0, 1.0};
    EXPECT_THROW(s.validate(), Error);
}

TEST(Sde, EulerStepZeroNoise) {
    const SdeSystem s = linear_system(-1.0, 1.0, 1.0);
    const double x[] = {1.0};
    const double xi[] = {0.0};
    EXPECT_DOUBLE_EQ(euler_maruyama_step(x, s, 0.01, xi)[0], 0.99);
}

TEST(Sde, EulerStepIdentity) {
    const SdeSystem s = linear_system(0.0, 1.0, 0.0);
    const double x[] = {0.0};
    const double xi[] = {0.0};
    EXPECT_EQ(euler_maruyama_step(x, s, 1.0, xi)[0], 0.0);
}

TEST(Sde, EulerStepWithNoise) {
    const SdeSystem s = linear_system(-1.0, 1.0, 1.0);
    const double x[] = {1.0};
    const double xi[] = {1.0};
    EXPECT_NEAR(euler_maruyama_step(x, s, 0.01, xi)[0], 0.99 + 0.1 * std::sqrt(2.0), 1e-14);
}

TEST(Sde, EulerStepNonFiniteDrift) {
    SdeSystem s = linear_system(0.0, 1.0, 0.0);
    s.drift = [](std::span<const double>, std::span<double> out) {
        out[0] = std::numeric_limits<double>::quiet_NaN();
    };
    const double x[] = {0.0};
    const double xi[] = {0.0};
    EXPECT_THROW(euler_maruyama_step(x, s, 0.1, xi), NonFiniteDrift);
}

TEST(Sde, ZeroNoiseZeroDriftPathIsConstantAndCapped) {
    const SdeSystem s = linear_system(0.0, 1.0, 0.3);
    const StopRule stop = [](std::span<const double> x) { return x[0] > 1.0; };
    const PathSample p = simulate_path(s, stop, 1.0, 0.1, zero_noise());
    EXPECT_TRUE(p.capped);
    EXPECT_EQ(p.stop_index, 10u);
    EXPECT_EQ(p.length(), 11u);
    EXPECT_EQ(p.noise.size(), p.states.size() - 1);
    for (std::size_t k = 0; k < p.length(); ++k) EXPECT_EQ(p.state(k)[0], 0.3);
}

TEST(Sde, InitiallyStoppedPath) {
    const SdeSystem s = linear_system(0.0, 1.0, 2.0);
    const StopRule stop = [](std::span<const double> x) { return x[0] > 1.0; };
    const PathSample p = simulate_path(s, stop, 1.0, 0.1, RngStream{1, 0});
    EXPECT_EQ(p.stop_index, 0u);
    EXPECT_EQ(p.length(), 1u);
    EXPECT_FALSE(p.capped);
    EXPECT_TRUE(p.noise.empty());
}

TEST(Sde, PathInvariants) {
    const SdeSystem s = linear_system(-1.0, 1.0, 0.0);
    const StopRule stop = [](std::span<const double> x) { return std::abs(x[0]) > 0.5; };
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const PathSample p = simulate_path(s, stop, 2.0, 1e-2, RngStream{seed, 0});
        EXPECT_EQ(p.state(0)[0], 0.0);
        EXPECT_EQ(p.noise.size(), p.states.size() - 1);
        EXPECT_LE(p.stop_index, p.length() - 1);
        if (!p.capped) {
            EXPECT_GT(std::abs(p.state(p.stop_index)[0]), 0.5);
        }
    }
}

TEST(Sde, CapRoundsUp) {
    EXPECT_EQ(cap_steps(1.0, 0.3), 4u);
    EXPECT_EQ(cap_steps(1.0, 0.1), 10u);
    EXPECT_EQ(cap_steps(1e4, 1e-3), 10000000u);
}

TEST(Sde, BitExactReproducibility) {
    const SdeSystem s = linear_system(-1.0, 1.0, 0.5);
    const PathSample a = simulate_path(s, nullptr, 1.0, 1e-3, RngStream{5, 3});
    const PathSample b = simulate_path(s, nullptr, 1.0, 1e-3, RngStream{5, 3});
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.noise, b.noise);
}

TEST(Sde, NonFiniteDriftReportsStep) {
    SdeSystem s = linear_system(0.0, 1.0, 0.0);
    s.drift = [](std::span<const double> x, std::span<double> out) {
        out[0] = x[0] > 0.25 ? std::numeric_limits<double>::infinity() : 1.0;
    };
    try {
        simulate_path(s, nullptr, 1.0, 0.1, zero_noise());
        FAIL() << "expected NonFiniteDrift";
    } catch (const NonFiniteDrift& e) {
        EXPECT_EQ(e.index(), 3u);
    }
}

TEST(Sde, OrnsteinUhlenbeckMoments) {
    const SdeSystem s = linear_system(-1.0, 1.0, 1.0);
    const double dt = 1e-3;
    const std::size_t n = 4000;
    double s1 = 0.0, s2 = 0.0;
    std::vector<double> xt(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PathSample p = simulate_path(s, nullptr, 1.0, dt, RngStream::for_index(77, i));
        xt[i] = p.state(p.length() - 1)[0];
        s1 += xt[i];
    }
    const double mean = s1 / n;
    for (double v : xt) s2 += (v - mean) * (v - mean);
    const double var = s2 / (n - 1);
    const double target_var = 1.0 - std::exp(-2.0);
    EXPECT_NEAR(mean, std::exp(-1.0), 3.0 * std::sqrt(var / n) + 2.0 * dt);
    EXPECT_NEAR(var, target_var, 3.0 * target_var * std::sqrt(2.0 / (n - 1)) + 2.0 * dt);
}

TEST(Sde, BatchPathsAreUncorrelated) {
    const SdeSystem s = linear_system(-1.0, 1.0, 0.0);
    const std::size_t n = 2000;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PathSample p = simulate_path(s, nullptr, 0.5, 1e-2, RngStream::for_index(3, i));
        a[i] = p.state(p.length() - 1)[0];
        const PathSample q = simulate_path(s, nullptr, 0.5, 1e-2, RngStream::for_index(3, i + n));
        b[i] = q.state(q.length() - 1)[0];
    }
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) ma += a[i] / n, mb += b[i] / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Sde, LmcQuadraticVariance) {
    const SdeSystem s = SdeSystem::langevin(std::make_shared<QuadraticPotential>(1.0), 1.0, {0.0});
    LmcConfig c;
    c.n_steps = 1'000'000;
    c.dt = 1e-3;
    c.n_samp = 1000;
    const StateSet st = sample_invariant_lmc(s, c, RngStream{11, 0});
    ASSERT_EQ(st.size(), 1000u);
    double m = 0.0;
    for (std::size_t i = 0; i < st.size(); ++i) m += st[i][0] / 1000.0;
    double v = 0.0;
    for (std::size_t i = 0; i < st.size(); ++i) v += (st[i][0] - m) * (st[i][0] - m) / 999.0;
    EXPECT_NEAR(v, 1.0, 3.0 * std::sqrt(2.0 / 999.0));
}

TEST(Sde, LmcReturnsWholeChainWhenAsked) {
    const SdeSystem s = linear_system(-1.0, 1.0, 0.0);
    LmcConfig c;
    c.n_steps = 200;
    c.dt = 1e-2;
    c.burn_in = 50;
    c.n_samp = 150;
    const StateSet st = sample_invariant_lmc(s, c, RngStream{1, 0});
    EXPECT_EQ(st.size(), 150u);
    std::set<double> distinct(st.data.begin(), st.data.end());
    EXPECT_EQ(distinct.size(), 150u);
}

TEST(Sde, LmcInsufficientChain) {
    const SdeSystem s = linear_system(-1.0, 1.0, 0.0);
    LmcConfig c;
    c.n_steps = 100;
    c.burn_in = 50;
    c.n_samp = 51;
    EXPECT_THROW(sample_invariant_lmc(s, c, RngStream{1, 0}), InsufficientChain);
}

TEST(Sde, LmcFreeDriftStatesFinite) {
    const SdeSystem s = linear_system(0.0, 1.0, 0.0);
    LmcConfig c;
    c.n_steps = 500;
    c.n_samp = 100;
    const StateSet st = sample_invariant_lmc(s, c, RngStream{2, 0});
    for (double v : st.data) EXPECT_TRUE(std::isfinite(v));
}
