#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "golearn/fk_oracle.hpp"
#include "golearn/gradients.hpp"
#include "golearn/info_metrics.hpp"
#include "golearn/losses.hpp"
#include "golearn/observables.hpp"
#include "golearn/optimize.hpp"
#include "golearn/potentials.hpp"

namespace golearn {

// ---------------------------------------------------------------------------
// Config helpers

ObservableSpec observable_from_json(const nlohmann::json& j);
nlohmann::json observable_to_json(const ObservableSpec& s);
LmcConfig lmc_from_json(const nlohmann::json& j, LmcConfig defaults = {});
nlohmann::json lmc_to_json(const LmcConfig& c);

// ---------------------------------------------------------------------------
// 1-D exit-time oracle bound to a start point and exit boundary

struct ExitOracle {
    double beta = 1.0;
    double x0 = -1.0;
    double exit_point = 1.0;
    std::size_t n_nodes = 4001;
    double mass_tol = 1e-12;
    double search_lo = -10.0;

    Grid1D grid_for(const PotentialModel& v) const;
    /// (E[tau], E[tau^2]) from x0.
    std::pair<double, double> moments(const PotentialModel& v) const;
    /// E^{x0}[ int_0^tau source(X_s) ds ] under the Langevin dynamics of `v`.
    double functional(const PotentialModel& v, const ScalarFn& source) const;
};

/// Stopped path KL from x0 to the exit, E_a[ int_0^tau (beta/4)(b_a - b_b)^2 ds ].
double stopped_path_kl(const ExitOracle& oracle, const PotentialModel& a, const PotentialModel& b);

// ---------------------------------------------------------------------------
// Gradient checks

/// Quadrature RER gradient (forward: reference Gibbs nodes; reverse: surrogate
/// Gibbs nodes on a fixed interval) against central differences of the same sum.
std::vector<GradCheckRow> check_rer_gradient_quadrature(const PotentialModel& reference,
                                                        const PotentialModel& surrogate,
                                                        double beta, bool reverse,
                                                        std::size_t n_nodes, double h);

/// Martingale estimate of grad E[phi^2] against CRN central differences of the
/// Monte Carlo second moment (same seed at theta +- h).
std::vector<GradCheckRow> check_second_moment_gradient_crn(const ObservableSpec& spec,
                                                           const PotentialModel& surrogate,
                                                           double beta, const Vector& x0,
                                                           std::size_t n_path, double dt,
                                                           std::uint64_t seed, double h);

/// Assembled GO gradient against CRN central differences of the inexact loss.
/// Forward kinds use `forward_states`; reverse kinds draw states by LMC from the
/// surrogate with a frozen seed.
std::vector<GradCheckRow> check_go_gradient_crn(const LossSpec& spec,
                                                const PotentialModel& reference,
                                                const PotentialModel& surrogate, double beta,
                                                const Vector& x0, const StateSet& forward_states,
                                                const LmcConfig& lmc, std::uint64_t seed,
                                                double h);

/// Norm-wise relative error ||analytic - fd|| / ||fd|| over the rows.
double normwise_rel_error(const std::vector<GradCheckRow>& rows);

// ---------------------------------------------------------------------------
// Bound scan on the asymmetric double well

struct BoundScanConfig {
    double theta_star = 0.5;
    double theta_lo = 0.0;
    double theta_hi = 1.0;
    std::size_t n_theta = 21;
    double beta = 1.0;
    double x0 = -1.0;
    double exit_point = 1.0;
    std::size_t fk_nodes = 4001;
    std::size_t quad_nodes = 200;

    static BoundScanConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct BoundScanRow {
    double theta = 0.0;
    DivergenceReport report;
    double m1_ref = 0.0, m2_ref = 0.0;
    double m1_sur = 0.0, m2_sur = 0.0;
};

struct BoundScanResult {
    std::vector<BoundScanRow> rows;
    bool go_bounds_hold = false;       // GO-f and GO-r >= |error| on every row
    bool zero_at_reference = false;    // every divergence and the error <= 1e-6 at theta*
    bool kl_below_error_somewhere = false;
};

BoundScanResult run_bound_scan(const BoundScanConfig& config);
void write_bound_scan(const BoundScanResult& r, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Confined Gaussian mixture training comparison

struct GmmExperimentConfig {
    Vector theta_star;
    Vector theta0;
    double quartic = 0.2;
    double beta = 1.0;
    double x0 = -1.0;
    double exit_point = 1.0;
    double t_cap = 10000.0;
    std::vector<LossKind> losses = {LossKind::RER_F, LossKind::RER_R, LossKind::GO_F,
                                    LossKind::GO_R};
    std::size_t max_iters = 200;
    double learning_rate = 0.2;
    std::size_t n_samp = 1000;
    std::size_t n_path = 1000;
    double dt = 1e-3;
    LmcConfig lmc;
    std::uint64_t seed = 20240607;
    std::size_t fk_nodes = 2001;
    std::size_t quad_nodes = 200;
    /// nullopt: the oracle second moment of the reference.
    std::optional<double> m_phi;

    GmmExperimentConfig();
    static GmmExperimentConfig from_json(const nlohmann::json& j, bool paper_scale = false);
    nlohmann::json to_json() const;
    ExitOracle oracle() const;
};

/// Deterministic evaluations at a GMM iterate: oracle moments, observable error,
/// and the quadrature+oracle value of the loss being trained.
class GmmDiagnostics {
public:
    GmmDiagnostics(const GmmExperimentConfig& config, const PotentialModel& reference,
                   LossKind kind, double m_phi);
    IterateDiagnostics operator()(const PotentialModel& surrogate) const;

    double reference_mean() const { return m1_ref_; }
    double reference_second_moment() const { return m2_ref_; }
    /// T (M_phi + m2~) H with quadrature H in the given direction.
    double go_loss(const PotentialModel& surrogate, bool reverse) const;
    /// Quadrature relative entropy rate in the given direction.
    double rer(const PotentialModel& surrogate, bool reverse) const;

private:
    const GmmExperimentConfig& config_;
    const PotentialModel& reference_;
    LossKind kind_;
    double m_phi_;
    ExitOracle oracle_;
    double m1_ref_ = 0.0, m2_ref_ = 0.0;
    WeightedStates pi_ref_;
};

struct GmmRun {
    LossKind kind;
    TrainTrace trace;
};

struct GmmResult {
    double m1_ref = 0.0;
    double m2_ref = 0.0;
    double m_phi = 0.0;
    std::vector<GmmRun> runs;

    const GmmRun* find(LossKind k) const;
};

GmmResult run_gmm_experiment(const GmmExperimentConfig& config);
void write_gmm(const GmmResult& r, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Muller-Brown robustness to training-data distribution

struct MbExperimentConfig {
    double scale = 0.02;
    double beta = 1.0;
    Vector x0 = {-0.55, 0.45};
    Vector ellipse_center = {-0.05, 0.467};
    Vector ellipse_axes = {0.2, 0.15};
    double t_cap = 100.0;
    double dt = 1e-2;
    MlpConfig mlp;
    std::vector<LossKind> losses = {LossKind::EM, LossKind::FM, LossKind::GO_F};
    std::size_t trials = 2;
    std::size_t epochs = 200;
    std::size_t n_samp = 1000;
    std::size_t n_path = 50;
    double learning_rate = 1e-2;
    // Data pools
    std::size_t pool_size = 100000;
    std::size_t pool_thin = 10;
    double pool_dt = 1e-3;
    Vector set_a_start = {-0.558, 1.442};
    Vector set_b_center = {-0.558, 1.442};
    double set_b_radius = 0.35;
    // Evaluation
    std::size_t ref_paths = 2000;
    std::size_t eval_paths = 200;
    std::size_t eval_window = 20;
    std::uint64_t seed = 1979;

    MbExperimentConfig();
    static MbExperimentConfig from_json(const nlohmann::json& j, bool paper_scale = false);
    nlohmann::json to_json() const;
    ObservableSpec observable() const;
    Region set_b_region() const;
    /// Seed of the training subset drawn for (trial, dataset).
    std::uint64_t subset_seed(std::size_t trial, char dataset) const;
};

struct MbPools {
    StateSet set_a;
    StateSet set_b;
};

/// Set A: a long reference chain, thinned. Set B: a chain started at
/// set_b_center whose proposals leaving the set_b disc are rejected.
MbPools generate_mb_pools(const MbExperimentConfig& config, const PotentialModel& reference);
/// Uniform subset without replacement.
StateSet subsample(const StateSet& pool, std::size_t n, std::uint64_t seed);

struct MbRun {
    LossKind kind;
    char dataset = 'A';
    std::size_t trial = 0;
    TrainTrace trace;
    double final_error = 0.0;  // mean of (mu - mu~)^2 / 2 over the evaluation window
};

struct MbResult {
    MomentEstimate reference;
    std::vector<MbRun> runs;

    /// median over trials of final_error on set B divided by that on set A.
    double error_ratio(LossKind k) const;
    double median_error(LossKind k, char dataset) const;
};

MbResult run_mb_experiment(const MbExperimentConfig& config);
void write_mb(const MbResult& r, const std::filesystem::path& out_dir);

}  // namespace golearn
