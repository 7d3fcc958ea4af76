#include "golearn/optimize.hpp"

#include <chrono>
#include <cmath>

namespace golearn {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::SGD ? "sgd" : "adagrad"; }

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::SGD;
    if (s == "adagrad") return OptimizerKind::AdaGrad;
    throw ConfigError("unknown optimizer: " + s);
}

std::string to_string(TrainStatus s) {
    switch (s) {
        case TrainStatus::Completed: return "completed";
        case TrainStatus::Converged: return "converged";
        case TrainStatus::NonFiniteDrift: return "non_finite_drift";
        case TrainStatus::Diverged: return "diverged";
    }
    return "?";
}

void adagrad_step(Vector& theta, const Vector& grad, Vector& accumulator, double gamma) {
    if (grad.size() != theta.size()) throw DimMismatch("gradient size mismatch");
    if (accumulator.empty()) accumulator.assign(theta.size(), 0.0);
    if (accumulator.size() != theta.size()) throw DimMismatch("accumulator size mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
        accumulator[i] += grad[i] * grad[i];
        theta[i] -= gamma * grad[i] / (std::sqrt(accumulator[i]) + kAdaGradEps);
    }
}

void sgd_step(Vector& theta, const Vector& grad, double gamma) {
    if (grad.size() != theta.size()) throw DimMismatch("gradient size mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= gamma * grad[i];
}

void TrainConfig::validate() const {
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (eps_theta < 0.0 || eps_loss < 0.0) throw ConfigError("tolerances must be nonnegative");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (is_goal_oriented(loss.kind)) {
        loss.observable.validate();
        if (loss.n_path < 2) throw ConfigError("GO losses need at least two paths");
        if (!(loss.dt > 0.0)) throw ConfigError("path step must be positive");
        if (loss.m_phi && *loss.m_phi < 0.0) throw ConfigError("m_phi must be nonnegative");
    }
}

std::uint64_t iteration_seed(std::uint64_t seed, std::size_t iter, std::uint64_t purpose) {
    return mix64(mix64(seed ^ (purpose * 0x9e3779b97f4a7c15ULL)) + iter);
}

nlohmann::json TrainCheckpoint::to_json() const {
    return {{"version", 1},
            {"next_iter", next_iter},
            {"theta", theta},
            {"accumulator", accumulator},
            {"last_loss", std::isfinite(last_loss) ? nlohmann::json(last_loss) : nlohmann::json()},
            {"seed", seed},
            {"loss_kind", loss_kind}};
}

TrainCheckpoint TrainCheckpoint::from_json(const nlohmann::json& j) {
    if (j.value("version", 0) != 1) throw ConfigError("unsupported checkpoint version");
    TrainCheckpoint c;
    c.next_iter = j.at("next_iter").get<std::size_t>();
    c.theta = j.at("theta").get<Vector>();
    c.accumulator = j.at("accumulator").get<Vector>();
    if (!j.at("last_loss").is_null()) c.last_loss = j.at("last_loss").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.loss_kind = j.at("loss_kind").get<std::string>();
    return c;
}

namespace {

constexpr std::uint64_t kDataPurpose = 1;
constexpr std::uint64_t kStatePurpose = 2;
constexpr std::uint64_t kPathPurpose = 3;

double l2(const Vector& v) { return std::sqrt(norm2(v)); }

StateSet lmc_states(const PotentialModel& model, const TrainConfig& c, std::uint64_t seed) {
    auto handle = model.with_params(model.params());
    LmcConfig lmc = c.lmc;
    lmc.n_samp = c.n_samp;
    const SdeSystem sys = SdeSystem::langevin(handle, c.beta, c.x0);
    return sample_invariant_lmc(sys, lmc, RngStream{seed, 0});
}

}  // namespace

TrainTrace train(const TrainConfig& config, const PotentialModel& reference,
                 const PotentialModel& initial, const TrainData& data, const TrainHooks& hooks,
                 const std::optional<TrainCheckpoint>& resume) {
    config.validate();
    if (config.x0.size() != initial.dim()) throw DimMismatch("x0 dimension mismatch");
    const LossKind kind = config.loss.kind;

    TrainTrace trace;
    Vector theta = initial.params();
    Vector accumulator(theta.size(), 0.0);
    std::size_t start = 0;
    double last_loss = std::numeric_limits<double>::quiet_NaN();
    if (resume) {
        if (resume->theta.size() != theta.size()) throw DimMismatch("checkpoint theta size mismatch");
        if (resume->loss_kind != to_string(kind)) throw ConfigError("checkpoint is for another loss");
        theta = resume->theta;
        accumulator = resume->accumulator;
        start = resume->next_iter;
        last_loss = resume->last_loss;
    }

    std::optional<ReferenceBatch> fixed;
    try {
        if (!is_reverse(kind)) {
            StateSet states = data.states ? *data.states
                                          : lmc_states(reference, config,
                                                       iteration_seed(config.seed, 0, kDataPurpose));
            fixed = ReferenceBatch::from_samples(std::move(states), reference);
        }
    } catch (const NonFiniteDrift& e) {
        trace.status = TrainStatus::NonFiniteDrift;
        trace.message = e.what();
        trace.final_theta = theta;
        return trace;
    }

    auto save_checkpoint = [&](std::size_t next) {
        trace.checkpoint = {next, theta, accumulator, last_loss, config.seed, to_string(kind)};
    };
    save_checkpoint(start);

    for (std::size_t k = start; k <= config.max_iters; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        const PotentialPtr model = initial.with_params(theta);
        TrainRecord rec;
        rec.iter = k;
        rec.theta = theta;
        if (hooks.diagnose) rec.diagnostics = hooks.diagnose(*model);

        Vector grad;
        try {
            const ReferenceBatch batch =
                fixed ? *fixed
                      : ReferenceBatch::from_samples(
                            lmc_states(*model, config,
                                       iteration_seed(config.seed, k, kStatePurpose)),
                            reference);
            switch (kind) {
                case LossKind::EM:
                    rec.loss.value = em_loss(batch, *model);
                    grad = grad_em_loss(batch, *model);
                    break;
                case LossKind::FM:
                    rec.loss.value = fm_loss(batch, *model);
                    grad = grad_fm_loss(batch, *model);
                    break;
                case LossKind::RER_F:
                case LossKind::RER_R:
                    rec.loss.value = rer_loss(batch, *model, config.beta);
                    rec.loss.rer_term = 0.25 * rec.loss.value;
                    grad = grad_rer_loss(kind, batch, *model, config.beta);
                    break;
                case LossKind::GO_F:
                case LossKind::GO_R: {
                    const ObservableBatch paths = sample_observable_batch(
                        config.loss.observable, *model, config.beta, config.x0, config.loss.n_path,
                        config.loss.dt, iteration_seed(config.seed, k, kPathPurpose), true);
                    rec.loss = go_loss_inexact(config.loss, batch, *model, paths, config.beta);
                    const GradientEstimate g =
                        grad_go_loss(config.loss, batch, *model, paths, config.beta);
                    grad = g.grad;
                    rec.g1_norm = l2(g.g1);
                    rec.g2_norm = l2(g.g2);
                    const MomentEstimate mo = paths.moments();
                    rec.observable_mean = mo.mean;
                    rec.observable_var = mo.variance;
                    break;
                }
            }
        } catch (const NonFiniteDrift& e) {
            trace.status = TrainStatus::NonFiniteDrift;
            trace.message = std::string("iteration ") + std::to_string(k) + ": " + e.what();
            break;
        }
        rec.grad_norm = l2(grad);
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double loss = rec.loss.value;
        trace.records.push_back(rec);
        if (hooks.on_record) hooks.on_record(trace.records.back());

        if (!std::isfinite(loss) || loss > config.diverged_threshold) {
            trace.status = TrainStatus::Diverged;
            trace.message = "loss " + std::to_string(loss) + " at iteration " + std::to_string(k);
            break;
        }
        if (k == config.max_iters) break;  // final iterate is evaluated, not updated

        const Vector before = theta;
        if (config.optimizer == OptimizerKind::AdaGrad) {
            adagrad_step(theta, grad, accumulator, config.learning_rate);
        } else {
            sgd_step(theta, grad, config.learning_rate);
        }
        Vector step(theta.size());
        for (std::size_t i = 0; i < theta.size(); ++i) step[i] = theta[i] - before[i];
        const double dloss = std::abs(loss - last_loss);
        last_loss = loss;
        save_checkpoint(k + 1);
        if (l2(step) < config.eps_theta || (std::isfinite(dloss) && dloss < config.eps_loss)) {
            trace.status = TrainStatus::Converged;
            break;
        }
    }
    trace.final_theta = theta;
    return trace;
}

}  // namespace golearn
