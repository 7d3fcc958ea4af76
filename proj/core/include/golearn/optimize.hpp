#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "golearn/gradients.hpp"
#include "golearn/losses.hpp"
#include "golearn/potentials.hpp"
#include "golearn/sde.hpp"

namespace golearn {

enum class OptimizerKind { SGD, AdaGrad };
std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

inline constexpr double kAdaGradEps = 1e-8;

/// acc += g*g; theta -= gamma g / (sqrt(acc) + 1e-8).
void adagrad_step(Vector& theta, const Vector& grad, Vector& accumulator, double gamma);
/// theta -= gamma g.
void sgd_step(Vector& theta, const Vector& grad, double gamma);

struct TrainConfig {
    LossSpec loss;
    OptimizerKind optimizer = OptimizerKind::AdaGrad;
    double learning_rate = 0.2;
    std::size_t max_iters = 200;
    double eps_theta = 0.0;
    double eps_loss = 0.0;
    std::size_t n_samp = 1000;
    LmcConfig lmc;
    double beta = 1.0;
    Vector x0;  // path initial state
    std::uint64_t seed = 0;
    double diverged_threshold = 1e12;

    void validate() const;
};

/// Extra per-iterate evaluations supplied by the caller (oracle error,
/// deterministic loss). Kept separate so training never depends on them.
struct IterateDiagnostics {
    double oracle_error = std::numeric_limits<double>::quiet_NaN();
    double deterministic_loss = std::numeric_limits<double>::quiet_NaN();
    double oracle_mean = std::numeric_limits<double>::quiet_NaN();
    double oracle_variance = std::numeric_limits<double>::quiet_NaN();
};

struct TrainRecord {
    std::size_t iter = 0;
    Vector theta;  // parameters the loss and gradient were evaluated at
    LossValue loss;
    double grad_norm = 0.0;
    double g1_norm = std::numeric_limits<double>::quiet_NaN();
    double g2_norm = std::numeric_limits<double>::quiet_NaN();
    double observable_mean = std::numeric_limits<double>::quiet_NaN();
    double observable_var = std::numeric_limits<double>::quiet_NaN();
    IterateDiagnostics diagnostics;
    double wall_seconds = 0.0;  // not serialized to CSV
};

enum class TrainStatus { Completed, Converged, NonFiniteDrift, Diverged };
std::string to_string(TrainStatus s);

struct TrainCheckpoint {
    std::size_t next_iter = 0;
    Vector theta;
    Vector accumulator;
    double last_loss = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    std::string loss_kind;

    nlohmann::json to_json() const;
    static TrainCheckpoint from_json(const nlohmann::json& j);
};

struct TrainTrace {
    std::vector<TrainRecord> records;
    Vector final_theta;
    TrainStatus status = TrainStatus::Completed;
    std::string message;
    TrainCheckpoint checkpoint;
};

struct TrainHooks {
    /// Called with the model of each iterate before its update.
    std::function<IterateDiagnostics(const PotentialModel&)> diagnose;
    /// Called after each record is appended.
    std::function<void(const TrainRecord&)> on_record;
};

/// Fixed training data for forward losses. When absent, n_samp states are drawn
/// once from the reference by Langevin Monte Carlo.
struct TrainData {
    std::optional<StateSet> states;
};

/// Gradient descent on the configured loss. Reverse kinds resample their states
/// from the current surrogate every iteration; GO kinds resample paths every
/// iteration. NonFiniteDrift and loss divergence end the run with a partial trace.
TrainTrace train(const TrainConfig& config, const PotentialModel& reference,
                 const PotentialModel& initial, const TrainData& data = {},
                 const TrainHooks& hooks = {},
                 const std::optional<TrainCheckpoint>& resume = std::nullopt);

/// Seeds used at iteration k (paths, states); a pure function of (seed, k).
std::uint64_t iteration_seed(std::uint64_t seed, std::size_t iter, std::uint64_t purpose);

}  // namespace golearn
