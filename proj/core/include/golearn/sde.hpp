#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "golearn/potentials.hpp"
#include "golearn/rng.hpp"
#include "golearn/types.hpp"

namespace golearn {

using DriftFn = std::function<void(std::span<const double> x, std::span<double> out)>;
/// True when the state lies in the stopping set.
using StopRule = std::function<bool(std::span<const double> x)>;
/// Fills a vector with standard-normal increments.
using NoiseFn = std::function<void(std::span<double> xi)>;

/// dX = b(X) dt + sigma dW with scalar sigma = sqrt(2 / beta).
struct SdeSystem {
    DriftFn drift;
    double beta = 1.0;
    std::size_t dim = 1;
    Vector x0;

    double sigma() const { return std::sqrt(2.0 / beta); }
    void validate() const;

    /// Overdamped Langevin system with drift -grad V.
    static SdeSystem langevin(PotentialPtr potential, double beta, Vector x0);
};

/// x + dt b(x) + sqrt(dt) sigma xi. Throws NonFiniteDrift(0) if b(x) is not finite.
Vector euler_maruyama_step(std::span<const double> x, const SdeSystem& system, double dt,
                           std::span<const double> xi);

/// Discretized trajectory X_0..X_K together with the increments xi_0..xi_{K-1}
/// that produced it.
struct PathSample {
    std::size_t dim = 1;
    double dt = 0.0;
    Vector states;
    Vector noise;
    std::size_t stop_index = 0;
    bool capped = false;
    std::string stop_tag;          // identifies the stopping rule used
    std::uint64_t fingerprint = 0;  // parameter fingerprint of the drift, 0 if unknown
    bool has_noise = true;

    std::size_t length() const { return states.size() / dim; }
    std::span<const double> state(std::size_t k) const { return {states.data() + k * dim, dim}; }
    std::span<const double> increment(std::size_t k) const {
        return {noise.data() + k * dim, dim};
    }
};

/// Number of Euler-Maruyama steps covering [0, t_cap]: ceil(t_cap / dt).
std::size_t cap_steps(double t_cap, double dt);

/// Outcome of a streaming simulation.
struct PathOutcome {
    std::size_t stop_index = 0;
    bool capped = false;
    Vector final_state;
};

/// Core simulation loop. `on_step(k, x_k, xi_k)` is called for every step taken
/// before the stop index, with the state the step starts from and its increment.
/// The state buffer passed to the callback is reused.
template <class OnStep>
PathOutcome run_path(const SdeSystem& system, const StopRule& stop, std::size_t max_steps,
                     double dt, NoiseFn& noise, OnStep&& on_step) {
    const std::size_t m = system.dim;
    Vector x = system.x0;
    Vector b(m), xi(m);
    const double sq = std::sqrt(dt) * system.sigma();
    for (std::size_t k = 0; k < max_steps; ++k) {
        if (stop && stop(x)) return {k, false, std::move(x)};
        system.drift(x, b);
        for (std::size_t i = 0; i < m; ++i) {
            if (!std::isfinite(b[i])) throw NonFiniteDrift(k);
        }
        noise(xi);
        on_step(k, std::span<const double>(x), std::span<const double>(xi));
        for (std::size_t i = 0; i < m; ++i) x[i] += dt * b[i] + sq * xi[i];
    }
    const bool hit = stop && stop(x);
    return {max_steps, !hit, std::move(x)};
}

/// Simulate one path, retaining states and increments.
PathSample simulate_path(const SdeSystem& system, const StopRule& stop, double t_cap, double dt,
                         NoiseFn noise, std::string stop_tag = {});
PathSample simulate_path(const SdeSystem& system, const StopRule& stop, double t_cap, double dt,
                         RngStream rng, std::string stop_tag = {});

/// Langevin Monte Carlo: one long Euler-Maruyama chain started at system.x0.
struct LmcConfig {
    std::size_t n_steps = 1'000'000;
    double dt = 1e-3;
    std::size_t n_samp = 1000;
    /// Defaults to 10% of n_steps.
    std::optional<std::size_t> burn_in;

    std::size_t effective_burn_in() const { return burn_in.value_or(n_steps / 10); }
};

/// Uniformly random subset (without replacement) of the post-burn-in chain states.
StateSet sample_invariant_lmc(const SdeSystem& system, const LmcConfig& config, RngStream rng);

}  // namespace golearn
