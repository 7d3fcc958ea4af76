#pragma once

#include <functional>
#include <span>
#include <utility>

#include "golearn/potentials.hpp"
#include "golearn/types.hpp"

namespace golearn {

/// Gauss-Legendre nodes and weights mapped onto [a, b].
struct GaussLegendreRule {
    Vector nodes;
    Vector weights;

    static GaussLegendreRule on(double a, double b, std::size_t n);
};

using ScalarFn = std::function<double(double)>;

/// Interval outside of which exp(-beta (V - V_min)) < rel_cutoff, found by scanning
/// [search_lo, search_hi] on a fine grid. 1-D potentials only.
std::pair<double, double> gibbs_support(const PotentialModel& v, double beta,
                                        double search_lo = -10.0, double search_hi = 10.0,
                                        double rel_cutoff = 1e-12);

/// E_pi[f] for pi ∝ exp(-beta V) by n-point Gauss-Legendre on [bounds].
/// Throws ZeroMass if the normalizer underflows.
double gauss_legendre_expect(const ScalarFn& f, const PotentialModel& v, double beta,
                             std::size_t n_nodes, std::pair<double, double> bounds);

/// The Gibbs density of `v` as quadrature nodes with normalized weights.
WeightedStates gibbs_quadrature(const PotentialModel& v, double beta, std::size_t n_nodes,
                                std::pair<double, double> bounds);

}  // namespace golearn
