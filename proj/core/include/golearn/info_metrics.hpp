#pragma once

#include <cstdint>

#include <json.hpp>

#include "golearn/potentials.hpp"
#include "golearn/sde.hpp"
#include "golearn/types.hpp"

namespace golearn {

/// Drift of a reference system evaluated at the states of a dataset, stored
/// alongside them so the reference drift never has to be re-evaluated.
struct DriftData {
    StateSet states;
    StateSet drift;  // b(x_j), same layout as states
};

/// Relative entropy rate 1/2 E_pi ||sigma^{-1}(b - b_tilde)||^2 = (beta/4) E_pi ||b - b_tilde||^2.
/// `pi` may be Monte Carlo samples (uniform weights) or quadrature nodes; weights
/// must sum to one within 1e-6.
double relative_entropy_rate(const DriftFn& b, const DriftFn& b_tilde, const WeightedStates& pi,
                             double sigma);
double relative_entropy_rate(const PotentialModel& reference, const PotentialModel& surrogate,
                             const WeightedStates& pi, double beta);

/// Monte Carlo estimate of the KL divergence between path laws on [0, t]:
/// average over reference paths of (1/2) sum_k dt ||sigma^{-1}(b - b_tilde)(X_k)||^2.
struct PathKlEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};
PathKlEstimate path_kl_mc(const SdeSystem& reference, const DriftFn& b_tilde, double t_final,
                          double dt, std::size_t n_paths, std::uint64_t seed);
/// Same, with each path started from the corresponding entry of `initial_states`.
PathKlEstimate path_kl_mc(const SdeSystem& reference, const DriftFn& b_tilde, double t_final,
                          double dt, const StateSet& initial_states, std::uint64_t seed);

/// KL(pi_a || pi_b) between Gibbs densities exp(-beta V) on a Gauss-Legendre grid.
double gibbs_kl(const PotentialModel& va, const PotentialModel& vb, double beta,
                std::pair<double, double> bounds, std::size_t n_nodes = 200);

/// sqrt(m2_ref + m2_sur) * sqrt(2 KL).
double go_error_bound(double second_moment_ref, double second_moment_sur, double path_kl);

/// ||phi||_inf * sqrt(2 KL); zero when KL is zero, even for unbounded phi.
double ckp_bound(double ess_sup_phi, double path_kl);

struct DivergenceReport {
    double rer_forward = 0.0;
    double rer_reverse = 0.0;
    double path_kl_forward = 0.0;
    double path_kl_reverse = 0.0;
    double gibbs_kl_forward = 0.0;
    double gibbs_kl_reverse = 0.0;
    double go_bound_forward = 0.0;
    double go_bound_reverse = 0.0;
    double ckp_bound = 0.0;
    double abs_error_observable = 0.0;
};

nlohmann::json to_json(const DivergenceReport& r);

}  // namespace golearn
