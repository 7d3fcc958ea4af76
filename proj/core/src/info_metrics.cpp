#include "golearn/info_metrics.hpp"

#include <cmath>

#include "golearn/quadrature.hpp"

namespace golearn {

namespace {

void check_normalized(const WeightedStates& pi) {
    if (pi.empty()) throw EmptyDataset("no states to average over");
    double s = 0.0;
    for (double w : pi.weights) s += w;
    if (std::abs(s - 1.0) > 1e-6) {
        throw UnnormalizedDensity("state weights sum to " + std::to_string(s));
    }
}

}  // namespace

double relative_entropy_rate(const DriftFn& b, const DriftFn& b_tilde, const WeightedStates& pi,
                             double sigma) {
    check_normalized(pi);
    const std::size_t m = pi.states.dim;
    Vector u(m), v(m);
    double s = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        b(pi.states[j], u);
        b_tilde(pi.states[j], v);
        double q = 0.0;
        for (std::size_t i = 0; i < m; ++i) q += (u[i] - v[i]) * (u[i] - v[i]);
        s += pi.weights[j] * q;
    }
    return 0.5 * s / (sigma * sigma);
}

double relative_entropy_rate(const PotentialModel& reference, const PotentialModel& surrogate,
                             const WeightedStates& pi, double beta) {
    auto fa = [&](std::span<const double> x, std::span<double> o) { reference.drift(x, o); };
    auto fb = [&](std::span<const double> x, std::span<double> o) { surrogate.drift(x, o); };
    return relative_entropy_rate(fa, fb, pi, std::sqrt(2.0 / beta));
}

namespace {

PathKlEstimate path_kl_impl(const SdeSystem& reference, const DriftFn& b_tilde, double t_final,
                            double dt, std::size_t n_paths, const StateSet* starts,
                            std::uint64_t seed) {
    reference.validate();
    if (n_paths < 2) throw ConfigError("path_kl_mc needs at least two paths");
    const std::size_t steps = cap_steps(t_final, dt);
    const std::size_t m = reference.dim;
    const double inv_var = 1.0 / (reference.sigma() * reference.sigma());
    Vector values(n_paths);
    Vector bt(m), br(m);
    SdeSystem sys = reference;
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (starts) sys.x0.assign((*starts)[i].begin(), (*starts)[i].end());
        NormalSource src(RngStream::for_index(seed, i));
        NoiseFn noise = [&](std::span<double> xi) { src.fill(xi); };
        double acc = 0.0;
        try {
            run_path(sys, StopRule{}, steps, dt, noise,
                     [&](std::size_t, std::span<const double> x, std::span<const double>) {
                         reference.drift(x, br);
                         b_tilde(x, bt);
                         double q = 0.0;
                         for (std::size_t k = 0; k < m; ++k) q += (br[k] - bt[k]) * (br[k] - bt[k]);
                         acc += q;
                     });
        } catch (const NonFiniteDrift&) {
            throw NonFiniteDrift(i, "path");
        }
        values[i] = 0.5 * dt * inv_var * acc;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n_paths);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double n = static_cast<double>(n_paths);
    return {mean, std::sqrt(ss / (n - 1.0) / n), n_paths};
}

}  // namespace

PathKlEstimate path_kl_mc(const SdeSystem& reference, const DriftFn& b_tilde, double t_final,
                          double dt, std::size_t n_paths, std::uint64_t seed) {
    return path_kl_impl(reference, b_tilde, t_final, dt, n_paths, nullptr, seed);
}

PathKlEstimate path_kl_mc(const SdeSystem& reference, const DriftFn& b_tilde, double t_final,
                          double dt, const StateSet& initial_states, std::uint64_t seed) {
    if (initial_states.dim != reference.dim) throw DimMismatch("initial states have wrong dim");
    return path_kl_impl(reference, b_tilde, t_final, dt, initial_states.size(), &initial_states,
                        seed);
}

double gibbs_kl(const PotentialModel& va, const PotentialModel& vb, double beta,
                std::pair<double, double> bounds, std::size_t n_nodes) {
    const auto rule = GaussLegendreRule::on(bounds.first, bounds.second, n_nodes);
    Vector ea(n_nodes), eb(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const std::span<const double> x(&rule.nodes[i], 1);
        ea[i] = -beta * va.value(x);
        eb[i] = -beta * vb.value(x);
    }
    const double sa = *std::max_element(ea.begin(), ea.end());
    const double sb = *std::max_element(eb.begin(), eb.end());
    double za = 0.0;
    double zb = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        za += rule.weights[i] * std::exp(ea[i] - sa);
        zb += rule.weights[i] * std::exp(eb[i] - sb);
    }
    if (!(za > 0.0) || !(zb > 0.0)) throw UnnormalizedDensity("Gibbs density has no mass on grid");
    const double log_za = std::log(za) + sa;
    const double log_zb = std::log(zb) + sb;
    double kl = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const double log_pa = ea[i] - log_za;
        const double log_pb = eb[i] - log_zb;
        kl += rule.weights[i] * std::exp(log_pa) * (log_pa - log_pb);
    }
    return std::max(kl, 0.0);
}

double go_error_bound(double second_moment_ref, double second_moment_sur, double path_kl) {
    if (second_moment_ref < 0.0 || second_moment_sur < 0.0 || path_kl < 0.0) {
        throw NegativeInput("go_error_bound inputs must be nonnegative");
    }
    return std::sqrt(second_moment_ref + second_moment_sur) * std::sqrt(2.0 * path_kl);
}

double ckp_bound(double ess_sup_phi, double path_kl) {
    if (path_kl <= 0.0) return 0.0;  // identical laws, even for unbounded phi
    return std::abs(ess_sup_phi) * std::sqrt(2.0 * std::max(path_kl, 0.0));
}

nlohmann::json to_json(const DivergenceReport& r) {
    return {{"rer_forward", r.rer_forward},
            {"rer_reverse", r.rer_reverse},
            {"path_kl_forward", r.path_kl_forward},
            {"path_kl_reverse", r.path_kl_reverse},
            {"gibbs_kl_forward", r.gibbs_kl_forward},
            {"gibbs_kl_reverse", r.gibbs_kl_reverse},
            {"go_bound_forward", r.go_bound_forward},
            {"go_bound_reverse", r.go_bound_reverse},
            {"ckp_bound", r.ckp_bound},
            {"abs_error_observable", r.abs_error_observable}};
}

}  // namespace golearn
