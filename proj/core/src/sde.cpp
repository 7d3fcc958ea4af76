#include "golearn/sde.hpp"

#include <algorithm>
#include <numeric>

namespace golearn {

void SdeSystem::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be positive");
    if (dim == 0) throw ConfigError("state dimension must be positive");
    if (x0.size() != dim) throw DimMismatch("initial state has wrong dimension");
    if (!drift) throw ConfigError("system has no drift");
}

SdeSystem SdeSystem::langevin(PotentialPtr potential, double beta, Vector x0) {
    SdeSystem s;
    s.dim = potential->dim();
    s.beta = beta;
    s.x0 = std::move(x0);
    s.drift = [p = std::move(potential)](std::span<const double> x, std::span<double> out) {
        p->drift(x, out);
    };
    s.validate();
    return s;
}

Vector euler_maruyama_step(std::span<const double> x, const SdeSystem& system, double dt,
                           std::span<const double> xi) {
    if (x.size() != system.dim || xi.size() != system.dim) {
        throw DimMismatch("euler_maruyama_step: dimension mismatch");
    }
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    Vector b(system.dim);
    system.drift(x, b);
    for (double v : b) {
        if (!std::isfinite(v)) throw NonFiniteDrift(0);
    }
    const double sq = std::sqrt(dt) * system.sigma();
    Vector out(system.dim);
    for (std::size_t i = 0; i < system.dim; ++i) out[i] = x[i] + dt * b[i] + sq * xi[i];
    return out;
}

std::size_t cap_steps(double t_cap, double dt) {
    if (!(dt > 0.0) || !(t_cap > 0.0)) throw ConfigError("t_cap and dt must be positive");
    const double ratio = t_cap / dt;
    const double rounded = std::round(ratio);
    // Tolerate representation error such as 1.0 / 1e-3 = 999.9999999999999.
    if (std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio)) {
        return static_cast<std::size_t>(rounded);
    }
    return static_cast<std::size_t>(std::ceil(ratio));
}

PathSample simulate_path(const SdeSystem& system, const StopRule& stop, double t_cap, double dt,
                         NoiseFn noise, std::string stop_tag) {
    system.validate();
    const std::size_t max_steps = cap_steps(t_cap, dt);
    PathSample path;
    path.dim = system.dim;
    path.dt = dt;
    path.stop_tag = std::move(stop_tag);
    auto out = run_path(system, stop, max_steps, dt, noise,
                        [&](std::size_t, std::span<const double> x, std::span<const double> xi) {
                            path.states.insert(path.states.end(), x.begin(), x.end());
                            path.noise.insert(path.noise.end(), xi.begin(), xi.end());
                        });
    path.states.insert(path.states.end(), out.final_state.begin(), out.final_state.end());
    path.stop_index = out.stop_index;
    path.capped = out.capped;
    return path;
}

PathSample simulate_path(const SdeSystem& system, const StopRule& stop, double t_cap, double dt,
                         RngStream rng, std::string stop_tag) {
    NormalSource src(rng);
    return simulate_path(system, stop, t_cap, dt, NoiseFn([&](std::span<double> xi) { src.fill(xi); }),
                         std::move(stop_tag));
}

StateSet sample_invariant_lmc(const SdeSystem& system, const LmcConfig& config, RngStream rng) {
    system.validate();
    const std::size_t burn = config.effective_burn_in();
    if (config.n_steps < burn || config.n_steps - burn < config.n_samp) {
        throw InsufficientChain("chain has " + std::to_string(config.n_steps) + " steps, burn-in " +
                                std::to_string(burn) + ", but " + std::to_string(config.n_samp) +
                                " samples were requested");
    }
    NormalSource src(rng);
    const std::size_t keep = config.n_steps - burn;
    // Choose which post-burn-in indices to keep before running the chain so only
    // the selected states are stored.
    std::vector<std::size_t> all(keep);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> picked;
    picked.reserve(config.n_samp);
    std::sample(all.begin(), all.end(), std::back_inserter(picked), config.n_samp, src.engine());

    const std::size_t m = system.dim;
    StateSet out(m);
    out.data.reserve(config.n_samp * m);
    Vector x = system.x0, b(m), xi(m);
    const double sq = std::sqrt(config.dt) * system.sigma();
    std::size_t next = 0;
    // Chain state after step j (1-based) is indexed j; post-burn-in states are j = burn+1..n_steps.
    for (std::size_t j = 1; j <= config.n_steps; ++j) {
        system.drift(x, b);
        for (std::size_t i = 0; i < m; ++i) {
            if (!std::isfinite(b[i])) throw NonFiniteDrift(j - 1);
        }
        src.fill(xi);
        for (std::size_t i = 0; i < m; ++i) x[i] += config.dt * b[i] + sq * xi[i];
        if (j > burn) {
            while (next < picked.size() && picked[next] == j - burn - 1) {
                out.push_back(x);
                ++next;
            }
        }
    }
    return out;
}

}  // namespace golearn
