#include <memory>

#include <benchmark/benchmark.h>

#include "golearn/fk_oracle.hpp"
#include "golearn/potentials.hpp"
#include "golearn/rng.hpp"
#include "golearn/sde.hpp"

using namespace golearn;

static void BM_EulerMaruyamaStepMullerBrown(benchmark::State& state) {
    const SdeSystem sys =
        SdeSystem::langevin(std::make_shared<MullerBrownPotential>(0.02), 1.0, {-0.55, 0.45});
    const Vector xi = {0.3, -0.7};
    Vector x = sys.x0;
    for (auto _ : state) {
        Vector y = euler_maruyama_step(x, sys, 1e-3, xi);
        benchmark::DoNotOptimize(y);
    }
}
BENCHMARK(BM_EulerMaruyamaStepMullerBrown);

static void BM_MlpDrift(benchmark::State& state) {
    MlpConfig cfg;
    cfg.hidden = {static_cast<std::size_t>(state.range(0))};
    const MlpPotential v(cfg);
    const Vector x = {0.1, 0.4};
    Vector out(2);
    for (auto _ : state) {
        v.drift(x, out);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_MlpDrift)->Arg(20)->Arg(100);

static void BM_MlpJacobianTDot(benchmark::State& state) {
    MlpConfig cfg;
    cfg.hidden = {static_cast<std::size_t>(state.range(0))};
    const MlpPotential v(cfg);
    const Vector x = {0.1, 0.4};
    const Vector w = {1.0, -0.5};
    Vector out(v.num_params());
    for (auto _ : state) {
        v.jacobian_t_dot(x, w, out);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_MlpJacobianTDot)->Arg(20)->Arg(100);

static void BM_ExitMomentSolve(benchmark::State& state) {
    const DoubleWellPotential v(0.3);
    const Grid1D grid = exit_grid_for(v, 1.0, 1.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        ExitMoments m = solve_exit_moments(v, 1.0, grid);
        benchmark::DoNotOptimize(m);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExitMomentSolve)->Arg(1001)->Arg(4001)->Arg(16001)->Complexity(benchmark::oN);

static void BM_ExitPathDoubleWell(benchmark::State& state) {
    const SdeSystem sys = SdeSystem::langevin(std::make_shared<DoubleWellPotential>(0.5), 1.0, {-1.0});
    const StopRule stop = [](std::span<const double> x) { return x[0] >= 1.0; };
    std::uint64_t i = 0;
    for (auto _ : state) {
        PathSample p = simulate_path(sys, stop, 1e4, 1e-3, RngStream::for_index(7, i++), "exit");
        benchmark::DoNotOptimize(p);
    }
}
BENCHMARK(BM_ExitPathDoubleWell)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
