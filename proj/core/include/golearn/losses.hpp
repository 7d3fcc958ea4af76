#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "golearn/observables.hpp"
#include "golearn/potentials.hpp"
#include "golearn/types.hpp"

namespace golearn {

enum class LossKind { EM, FM, RER_F, RER_R, GO_F, GO_R };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);
/// Reverse kinds draw their states from the surrogate's invariant law.
bool is_reverse(LossKind k);
bool is_goal_oriented(LossKind k);

/// Reference data at a set of states: weights describing the distribution the
/// states represent, the reference drift b(x_j), and optionally V(x_j).
struct ReferenceBatch {
    WeightedStates pi;
    StateSet drift;
    Vector energy;

    static ReferenceBatch from_samples(StateSet states, const PotentialModel& reference);
    static ReferenceBatch from_weighted(WeightedStates pi, const PotentialModel& reference);
    std::size_t size() const { return pi.size(); }
};

struct LossSpec {
    LossKind kind = LossKind::GO_R;
    /// Upper bound on the reference second moment; nullopt selects the "auto"
    /// policy (surrogate Monte Carlo second moment times m_phi_safety).
    std::optional<double> m_phi;
    double m_phi_safety = 2.0;
    double horizon = 10000.0;  // T multiplying the relative entropy rate
    std::size_t n_path = 1000;
    double dt = 1e-3;
    ObservableSpec observable;

    /// M_phi to use given the current surrogate second-moment estimate.
    double resolve_m_phi(double surrogate_second_moment) const;
};

struct LossValue {
    double value = 0.0;
    double second_moment_term = 0.0;  // surrogate E[phi^2]
    double rer_term = 0.0;            // relative entropy rate H = 1/2 E||sigma^{-1} u||^2
    double m_phi = 0.0;
};

/// Mean of |V(x_j) - V_theta(x_j)|^2.
double em_loss(const ReferenceBatch& data, const PotentialModel& surrogate);
/// Mean of ||b(x_j) - b_theta(x_j)||^2.
double fm_loss(const ReferenceBatch& data, const PotentialModel& surrogate);
/// beta * mean ||grad V(x_j) - grad V_theta(x_j)||^2  (= 4 H).
double rer_loss(const ReferenceBatch& data, const PotentialModel& surrogate, double beta);
/// H = (beta / 4) mean ||b - b_theta||^2 over the batch.
double relative_entropy_rate(const ReferenceBatch& data, const PotentialModel& surrogate,
                             double beta);

/// T/2 (M_phi + mean_i phi_i^2) mean_j ||sigma^{-1}(b(x_j) - b_theta(x_j))||^2.
/// Throws StalePathError when the paths were drawn under a different theta.
LossValue go_loss_inexact(const LossSpec& spec, const ReferenceBatch& data,
                          const PotentialModel& surrogate, const ObservableBatch& paths,
                          double beta);

/// T (M_phi + m2) H, for deterministic evaluations from an oracle and quadrature.
double go_loss_value(double horizon, double m_phi, double surrogate_second_moment, double rer);

nlohmann::json to_json(const LossValue& v);

}  // namespace golearn
