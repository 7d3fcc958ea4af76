#include "golearn/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>

namespace golearn {

GaussLegendreRule GaussLegendreRule::on(double a, double b, std::size_t n) {
    if (n < 2) throw ConfigError("Gauss-Legendre rule needs at least two nodes");
    if (!(a < b)) throw ConfigError("Gauss-Legendre rule needs a < b");
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)>
        table(gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free);
    if (!table) throw ConfigError("failed to allocate Gauss-Legendre table");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_integration_glfixed_point(a, b, i, &rule.nodes[i], &rule.weights[i], table.get());
    }
    return rule;
}

std::pair<double, double> gibbs_support(const PotentialModel& v, double beta, double search_lo,
                                        double search_hi, double rel_cutoff) {
    if (v.dim() != 1) throw DimMismatch("gibbs_support is defined for 1-D potentials");
    constexpr std::size_t kScan = 20001;
    const double h = (search_hi - search_lo) / static_cast<double>(kScan - 1);
    Vector e(kScan);
    double vmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kScan; ++i) {
        const double x = search_lo + h * static_cast<double>(i);
        e[i] = v.value(std::span<const double>(&x, 1));
        vmin = std::min(vmin, e[i]);
    }
    const double cut = -std::log(rel_cutoff) / beta;
    std::size_t lo = 0;
    std::size_t hi = kScan - 1;
    while (lo < kScan && e[lo] - vmin > cut) ++lo;
    while (hi > lo && e[hi] - vmin > cut) --hi;
    if (lo == 0 || hi == kScan - 1) {
        throw BoundaryTooClose("Gibbs mass reaches the search window; widen it");
    }
    return {search_lo + h * static_cast<double>(lo - 1), search_lo + h * static_cast<double>(hi + 1)};
}

WeightedStates gibbs_quadrature(const PotentialModel& v, double beta, std::size_t n_nodes,
                                std::pair<double, double> bounds) {
    if (v.dim() != 1) throw DimMismatch("Gibbs quadrature is defined for 1-D potentials");
    const auto rule = GaussLegendreRule::on(bounds.first, bounds.second, n_nodes);
    Vector energy(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) energy[i] = v.value(std::span<const double>(&rule.nodes[i], 1));
    const double vmin = *std::min_element(energy.begin(), energy.end());
    WeightedStates out;
    out.states = StateSet(1, rule.nodes);
    out.weights.resize(n_nodes);
    double z = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        out.weights[i] = rule.weights[i] * std::exp(-beta * (energy[i] - vmin));
        z += out.weights[i];
    }
    if (!(z > 0.0) || !std::isfinite(z)) throw ZeroMass("Gibbs normalizer underflowed");
    for (double& w : out.weights) w /= z;
    return out;
}

double gauss_legendre_expect(const ScalarFn& f, const PotentialModel& v, double beta,
                             std::size_t n_nodes, std::pair<double, double> bounds) {
    const auto pi = gibbs_quadrature(v, beta, n_nodes, bounds);
    double s = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) s += pi.weights[i] * f(pi.states.data[i]);
    return s;
}

}  // namespace golearn
