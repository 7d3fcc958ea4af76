#pragma once

#include <functional>
#include <string>
#include <vector>

#include "golearn/losses.hpp"
#include "golearn/observables.hpp"
#include "golearn/potentials.hpp"
#include "golearn/types.hpp"

namespace golearn {

/// Gradient of a goal-oriented loss with its two components:
/// grad = T (g1 + g2), g1 = H grad(m2), g2 = (M_phi + m2) grad(H).
struct GradientEstimate {
    Vector grad;
    Vector g1;
    Vector g2;
    Vector std_error;  // per coordinate, Monte Carlo parts only
};

/// E[phi^2 M_T] over a batch simulated with martingale weights under `surrogate`.
/// `std_error`, when non-null, receives the per-coordinate standard error.
Vector grad_second_moment(const ObservableBatch& paths, const PotentialModel& surrogate,
                          Vector* std_error = nullptr);

/// Same, from stored paths: mean over paths of phi^2 times the Ito sum of the path's increments.
Vector grad_second_moment(const ObservableSpec& spec, const PotentialModel& surrogate,
                          const std::vector<PathSample>& paths, double sigma);

/// E_pi[J^T (beta/2)(b_theta - b)] over fixed states.
Vector grad_rer_forward(const ReferenceBatch& data, const PotentialModel& surrogate, double beta,
                        Vector* std_error = nullptr);

/// Gradient of H under the surrogate's own Gibbs law: adds the score term
/// E[h (-beta)(grad_theta V - E[grad_theta V])] to the forward form. The
/// centring mean is taken over the same batch, so with quadrature weights this
/// is the exact derivative of the weighted sum.
Vector grad_rer_reverse(const ReferenceBatch& data, const PotentialModel& surrogate, double beta,
                        Vector* std_error = nullptr);

/// Score-function estimate of d/dtheta E_{pi_theta}[f] for the Gibbs law of `model`:
/// E[f (-beta)(grad_theta V - E[grad_theta V])].
Vector gibbs_score_gradient(const std::function<double(std::span<const double>)>& f,
                            const PotentialModel& model, const WeightedStates& pi, double beta,
                            Vector* std_error = nullptr);

/// Assemble the GO-loss gradient from one state batch and one path batch. The
/// direction (forward/reverse) is taken from spec.kind.
GradientEstimate grad_go_loss(const LossSpec& spec, const ReferenceBatch& data,
                              const PotentialModel& surrogate, const ObservableBatch& paths,
                              double beta);

/// Gradient of EM / FM / RER losses on a state batch.
Vector grad_em_loss(const ReferenceBatch& data, const PotentialModel& surrogate);
Vector grad_fm_loss(const ReferenceBatch& data, const PotentialModel& surrogate);
Vector grad_rer_loss(LossKind kind, const ReferenceBatch& data, const PotentialModel& surrogate,
                     double beta);

enum class FdMode { Deterministic, CommonRandomNumbers };
std::string to_string(FdMode m);

struct GradCheckRow {
    std::size_t coordinate = 0;
    double analytic = 0.0;
    double fd = 0.0;
    double rel_err = 0.0;
    FdMode mode = FdMode::Deterministic;
};

/// Central differences (L(theta + h e_i) - L(theta - h e_i)) / (2h). In CRN mode
/// the caller's loss must freeze its random streams; the mode is recorded.
/// rel_err = |analytic - fd| / max(|fd|, floor).
std::vector<GradCheckRow> fd_gradient_check(const std::function<double(const Vector&)>& loss,
                                            const Vector& theta, const Vector& analytic, double h,
                                            FdMode mode, double floor = 1e-300);

/// Plain central-difference gradient.
Vector fd_gradient(const std::function<double(const Vector&)>& loss, const Vector& theta,
                   double h);

}  // namespace golearn
