#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "golearn/fk_oracle.hpp"
#include "golearn/gradients.hpp"
#include "golearn/info_metrics.hpp"
#include "golearn/quadrature.hpp"

using namespace golearn;

namespace {

ObservableSpec exit_spec(double t_cap) {
    ObservableSpec s;
    s.kind = ObservableKind::FirstExit;
    s.region = Region::interval(-INFINITY, 1.0);
    s.t_cap = t_cap;
    return s;
}

StateSet lmc_states(const PotentialModel& v, double beta, double x0, std::size_t n, std::uint64_t seed) {
    LmcConfig c;
    c.n_steps = 1'000'000;
    c.n_samp = n;
    return sample_invariant_lmc(SdeSystem::langevin(v.with_params(v.params()), beta, {x0}), c,
                                RngStream{seed, 0});
}

ReferenceBatch quadrature_batch(const PotentialModel& density, const PotentialModel& reference,
                                std::pair<double, double> bounds) {
    return ReferenceBatch::from_weighted(gibbs_quadrature(density, 1.0, 200, bounds), reference);
}

}  // namespace

TEST(GradSecondMoment, ZeroMartingaleGivesZero) {
    const DoubleWellPotential v(0.3);
    ObservableBatch b;
    b.phi = {1.0, 2.0, 3.0};
    b.martingale = Matrix(3, 1);
    b.fingerprint = v.fingerprint();
    EXPECT_EQ(grad_second_moment(b, v), Vector{0.0});
}

TEST(GradSecondMoment, ConstantObservableHasMeanZero) {
    const DoubleWellPotential v(0.3);
    ObservableSpec s;
    s.kind = ObservableKind::TimeIntegral;
    s.t_cap = 1.0;
    const ObservableBatch b = sample_observable_batch(s, v, 1.0, {-1.0}, 5000, 1e-2, 3, true);
    Vector se;
    const Vector g = grad_second_moment(b, v, &se);
    EXPECT_LT(std::abs(g[0]), 3.0 * se[0]);
}

TEST(GradSecondMoment, MissingNoiseAndStale) {
    const DoubleWellPotential v(0.3), w(0.4);
    const ObservableBatch no_mart = sample_observable_batch(exit_spec(1.0), v, 1.0, {-1.0}, 4, 1e-2, 3, false);
    EXPECT_THROW(grad_second_moment(no_mart, v), MissingNoise);
    const ObservableBatch b = sample_observable_batch(exit_spec(1.0), v, 1.0, {-1.0}, 4, 1e-2, 3, true);
    EXPECT_THROW(grad_second_moment(b, w), StalePathError);
}

TEST(GradSecondMoment, StoredPathOverloadAgrees) {
    const DoubleWellPotential v(0.3);
    const ObservableSpec s = exit_spec(2.0);
    const ObservableBatch b = sample_observable_batch(s, v, 1.0, {-1.0}, 50, 1e-3, 12, true);
    const SdeSystem sys = SdeSystem::langevin(v.with_params(v.params()), 1.0, {-1.0});
    std::vector<PathSample> paths;
    for (std::size_t i = 0; i < 50; ++i) {
        paths.push_back(simulate_path(sys, s.stop_rule(), s.t_cap, 1e-3, RngStream::for_index(12, i), s.tag()));
        paths.back().fingerprint = v.fingerprint();
    }
    EXPECT_NEAR(grad_second_moment(s, v, paths, sys.sigma())[0], grad_second_moment(b, v)[0], 1e-8);
}

TEST(GradSecondMoment, UnbiasedAgainstOracle) {
    const double theta = 0.3, dt = 1e-3;
    const DoubleWellPotential v(theta);
    const Grid1D g = exit_grid_for(v, 1.0, 1.0, 4001);
    auto m2 = [&](double th) { return solve_exit_moments(DoubleWellPotential(th), 1.0, g).evaluated_at(-1.0).second; };
    const double oracle = (m2(theta + 1e-4) - m2(theta - 1e-4)) / 2e-4;
    const std::size_t reps = 50;
    double s = 0.0, s2 = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const ObservableBatch b = sample_observable_batch(exit_spec(1e4), v, 1.0, {-1.0}, 200, dt, 1000 + r, true);
        const double est = grad_second_moment(b, v)[0];
        s += est;
        s2 += est * est;
    }
    const double mean = s / reps;
    const double se = std::sqrt((s2 / reps - mean * mean) / (reps - 1));
    // discrete exit monitoring biases the path functional by O(sqrt(dt))
    EXPECT_NEAR(mean, oracle, 3.0 * se + std::sqrt(dt) * std::abs(oracle));
}

TEST(GradRerForward, ZeroWhenDriftsAgree) {
    const DoubleWellPotential v(0.3);
    const ReferenceBatch b = ReferenceBatch::from_samples(lmc_states(v, 1.0, -1.0, 100, 1), v);
    EXPECT_EQ(grad_rer_forward(b, v, 1.0), Vector{0.0});
}

TEST(GradRerForward, ExactGradientOfBatchLoss) {
    const DoubleWellPotential ref(0.5);
    GaussianMixturePotential sur({0.8, 1.2, -0.9, 1.1, std::log(0.7), std::log(0.8)});
    const ReferenceBatch b = ReferenceBatch::from_samples(lmc_states(ref, 1.0, -1.0, 300, 2), ref);
    auto loss = [&](const Vector& th) { return relative_entropy_rate(b, *sur.with_params(th), 1.0); };
    const auto rows = fd_gradient_check(loss, sur.params(), grad_rer_forward(b, sur, 1.0), 1e-5,
                                        FdMode::Deterministic, 1e-10);
    for (const auto& r : rows) EXPECT_LT(r.rel_err, 1e-8) << "coordinate " << r.coordinate;
}

TEST(GradRerForward, QuadratureMatchesFiniteDifferences) {
    const DoubleWellPotential ref(0.5), sur(0.1);
    const ReferenceBatch b = quadrature_batch(ref, ref, gibbs_support(ref, 1.0));
    auto loss = [&](const Vector& th) { return relative_entropy_rate(b, DoubleWellPotential(th[0]), 1.0); };
    const auto rows = fd_gradient_check(loss, sur.params(), grad_rer_forward(b, sur, 1.0), 1e-5, FdMode::Deterministic);
    EXPECT_LT(rows[0].rel_err, 1e-5);
}

TEST(GradRerForward, DescentDirectionReducesRate) {
    const DoubleWellPotential ref(0.5), sur(0.1);
    const ReferenceBatch b = quadrature_batch(ref, ref, gibbs_support(ref, 1.0));
    const double g = grad_rer_forward(b, sur, 1.0)[0];
    EXPECT_LT(g, 0.0);
    EXPECT_LT(relative_entropy_rate(b, DoubleWellPotential(0.1 - 0.01 * g), 1.0), relative_entropy_rate(b, sur, 1.0));
}

TEST(GradRerReverse, ZeroAtReference) {
    const DoubleWellPotential v(0.5);
    const ReferenceBatch b = ReferenceBatch::from_samples(lmc_states(v, 1.0, -1.0, 200, 3), v);
    EXPECT_EQ(grad_rer_reverse(b, v, 1.0), Vector{0.0});
}

TEST(GradRerReverse, QuadraticPairQuadrature) {
    const QuadraticPotential ref(1.0);
    const double theta = 2.0;
    const std::pair<double, double> box{-10.0, 10.0};
    auto loss = [&](const Vector& th) {
        const QuadraticPotential s(th[0]);
        return relative_entropy_rate(quadrature_batch(s, ref, box), s, 1.0);
    };
    const QuadraticPotential sur(theta);
    const Vector g = grad_rer_reverse(quadrature_batch(sur, ref, box), sur, 1.0);
    // H = (theta - 1)^2 / (4 theta)
    EXPECT_NEAR(g[0], 3.0 / 16.0, 1e-10);
    EXPECT_LT(fd_gradient_check(loss, {theta}, g, 1e-5, FdMode::Deterministic)[0].rel_err, 1e-5);
}

TEST(GradRerReverse, QuadraticPairMonteCarlo) {
    // The estimator's relative SE at 1000 states is about 3.5%, so agreement is judged in SE units.
    const QuadraticPotential ref(1.0), sur(2.0);
    const ReferenceBatch b = ReferenceBatch::from_samples(lmc_states(sur, 1.0, 0.0, 1000, 5), ref);
    Vector se;
    const double g = grad_rer_reverse(b, sur, 1.0, &se)[0];
    EXPECT_NEAR(g, 3.0 / 16.0, 3.0 * se[0]);
    EXPECT_LT(se[0] / (3.0 / 16.0), 0.05);
}

TEST(GibbsScore, QuadraticSecondMoment) {
    const double theta = 2.0, beta = 1.0;
    const QuadraticPotential v(theta);
    const StateSet st = lmc_states(v, beta, 0.0, 5000, 9);
    Vector se;
    const Vector g = gibbs_score_gradient([](std::span<const double> x) { return x[0] * x[0]; }, v,
                                          WeightedStates::uniform(st), beta, &se);
    EXPECT_NEAR(g[0], -1.0 / (beta * theta * theta), 3.0 * se[0]);
}

TEST(GradGoLoss, AssemblyIdentityAndZeroAtReference) {
    const DoubleWellPotential ref(0.5), sur(0.2);
    LossSpec spec;
    spec.kind = LossKind::GO_F;
    spec.m_phi = 30.0;
    spec.horizon = 10.0;
    spec.observable = exit_spec(20.0);
    const ReferenceBatch b = ReferenceBatch::from_samples(lmc_states(ref, 1.0, -1.0, 200, 7), ref);
    const ObservableBatch p = sample_observable_batch(spec.observable, sur, 1.0, {-1.0}, 100, 1e-3, 3, true);
    const GradientEstimate g = grad_go_loss(spec, b, sur, p, 1.0);
    EXPECT_EQ(g.grad[0], spec.horizon * (g.g1[0] + g.g2[0]));
    EXPECT_GT(g.std_error[0], 0.0);

    const ObservableBatch p0 = sample_observable_batch(spec.observable, ref, 1.0, {-1.0}, 100, 1e-3, 3, true);
    EXPECT_EQ(grad_go_loss(spec, b, ref, p0, 1.0).grad, Vector{0.0});
    spec.kind = LossKind::RER_F;
    EXPECT_THROW(grad_go_loss(spec, b, sur, p, 1.0), ConfigError);
}

TEST(GradGoLoss, DeterministicLossGradient) {
    // T (M + m2(theta)) H(theta) with m2 from the exit-time oracle and H by quadrature.
    const double T = 100.0, M = 40.0, theta = 0.3;
    const DoubleWellPotential ref(0.5);
    const ReferenceBatch b = quadrature_batch(ref, ref, gibbs_support(ref, 1.0));
    const Grid1D grid = exit_grid_for(DoubleWellPotential(theta), 1.0, 1.0, 4001);
    auto loss = [&](const Vector& th) {
        const DoubleWellPotential s(th[0]);
        const double m2 = solve_exit_moments(s, 1.0, grid).evaluated_at(-1.0).second;
        return T * (M + m2) * relative_entropy_rate(b, s, 1.0);
    };
    // Tangent equations: L dm1 = -J m1', L dm2 = -(2 dm1 + J m2').
    const DoubleWellPotential sur(theta);
    const ExitMoments m = solve_exit_moments(sur, 1.0, grid);
    const double hx = grid.spacing();
    auto deriv = [&](const Vector& f) {
        Vector d(f.size());
        for (std::size_t i = 1; i + 1 < f.size(); ++i) d[i] = (f[i + 1] - f[i - 1]) / (2 * hx);
        d.front() = 0.0;
        d.back() = (3 * f.back() - 4 * f[f.size() - 2] + f[f.size() - 3]) / (2 * hx);
        return d;
    };
    const ScalarFn drift = [&](double x) { return sur.drift(Vector{x})[0]; };
    const ScalarFn jac = [&](double x) { return sur.jacobian(Vector{x})(0, 0); };
    const Vector dm1x = deriv(m.m1), dm2x = deriv(m.m2);
    const Vector dm1 = solve_exit_functional(drift, 1.0, grid,
                                             [&](double x) { return jac(x) * interpolate(grid, dm1x, x); });
    const Vector dm2 = solve_exit_functional(drift, 1.0, grid, [&](double x) {
        return 2.0 * interpolate(grid, dm1, x) + jac(x) * interpolate(grid, dm2x, x);
    });
    const double m2 = m.evaluated_at(-1.0).second;
    const double H = relative_entropy_rate(b, sur, 1.0);
    const double analytic = T * (H * interpolate(grid, dm2, -1.0) + (M + m2) * grad_rer_forward(b, sur, 1.0)[0]);
    EXPECT_LT(fd_gradient_check(loss, {theta}, {analytic}, 1e-5, FdMode::Deterministic)[0].rel_err, 1e-5);
}

TEST(GradEmFm, MatchFiniteDifferences) {
    const DoubleWellPotential ref(0.5);
    const GaussianMixturePotential sur({0.8, 1.2, -0.9, 1.1, std::log(0.7), std::log(0.8)});
    const ReferenceBatch b = ReferenceBatch::from_samples(lmc_states(ref, 1.0, -1.0, 100, 4), ref);
    auto em = [&](const Vector& th) { return em_loss(b, *sur.with_params(th)); };
    auto fm = [&](const Vector& th) { return fm_loss(b, *sur.with_params(th)); };
    for (const auto& r : fd_gradient_check(em, sur.params(), grad_em_loss(b, sur), 1e-5, FdMode::Deterministic, 1e-10))
        EXPECT_LT(r.rel_err, 1e-7);
    for (const auto& r : fd_gradient_check(fm, sur.params(), grad_fm_loss(b, sur), 1e-5, FdMode::Deterministic, 1e-10))
        EXPECT_LT(r.rel_err, 1e-7);
    const Vector g4 = grad_rer_loss(LossKind::RER_F, b, sur, 1.0), g1 = grad_rer_forward(b, sur, 1.0);
    for (std::size_t p = 0; p < g1.size(); ++p) EXPECT_NEAR(g4[p], 4.0 * g1[p], 1e-12 * std::abs(g4[p]));
}

TEST(FdCheck, QuadraticLoss) {
    auto loss = [](const Vector& th) {
        double s = 0.0;
        for (double v : th) s += v * v;
        return 0.5 * s;
    };
    const Vector theta = {0.3, -1.2, 2.0};
    const Vector fd = fd_gradient(loss, theta, 1e-3);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(fd[i], theta[i], 1e-10);
    const auto rows = fd_gradient_check(loss, theta, theta, 1e-3, FdMode::CommonRandomNumbers);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1].coordinate, 1u);
    EXPECT_EQ(rows[1].mode, FdMode::CommonRandomNumbers);
    EXPECT_EQ(to_string(FdMode::CommonRandomNumbers), "crn");
    for (const auto& r : rows) EXPECT_LT(r.rel_err, 1e-10);
}
