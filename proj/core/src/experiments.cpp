#include "golearn/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "golearn/gradients.hpp"
#include "golearn/io.hpp"
#include "golearn/quadrature.hpp"

namespace golearn {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Config helpers

ObservableSpec observable_from_json(const json& j) {
    ObservableSpec s;
    const std::string kind = j.value("kind", std::string("first_exit"));
    if (kind == "first_exit") s.kind = ObservableKind::FirstExit;
    else if (kind == "first_hit") s.kind = ObservableKind::FirstHit;
    else if (kind == "time_integral") s.kind = ObservableKind::TimeIntegral;
    else throw ConfigError("unknown observable kind: " + kind);
    s.t_cap = j.value("t_cap", s.t_cap);
    if (j.contains("interval")) {
        const auto iv = j.at("interval");
        auto end = [](const json& e, double inf) {
            return e.is_null() ? inf : e.get<double>();
        };
        const double inf = std::numeric_limits<double>::infinity();
        s.region = Region::interval(end(iv.at(0), -inf), end(iv.at(1), inf));
    } else if (j.contains("ellipse")) {
        const auto& e = j.at("ellipse");
        s.region = Region::ellipse(e.at("center").get<Vector>(), e.at("axes").get<Vector>());
    } else if (s.kind != ObservableKind::TimeIntegral) {
        throw ConfigError("observable needs an interval or ellipse region");
    }
    s.validate();
    return s;
}

json observable_to_json(const ObservableSpec& s) {
    json j;
    switch (s.kind) {
        case ObservableKind::FirstExit: j["kind"] = "first_exit"; break;
        case ObservableKind::FirstHit: j["kind"] = "first_hit"; break;
        case ObservableKind::TimeIntegral: j["kind"] = "time_integral"; break;
    }
    j["t_cap"] = s.t_cap;
    if (s.region.shape == Region::Shape::Interval) {
        auto end = [](double v) { return std::isfinite(v) ? json(v) : json(); };
        j["interval"] = json::array({end(s.region.lower), end(s.region.upper)});
    } else {
        j["ellipse"] = {{"center", s.region.center}, {"axes", s.region.semi_axes}};
    }
    return j;
}

LmcConfig lmc_from_json(const json& j, LmcConfig c) {
    c.n_steps = j.value("n_steps", c.n_steps);
    c.dt = j.value("dt", c.dt);
    c.n_samp = j.value("n_samp", c.n_samp);
    if (j.contains("burn_in") && !j.at("burn_in").is_null()) {
        c.burn_in = j.at("burn_in").get<std::size_t>();
    }
    return c;
}

json lmc_to_json(const LmcConfig& c) {
    return {{"n_steps", c.n_steps},
            {"dt", c.dt},
            {"n_samp", c.n_samp},
            {"burn_in", c.effective_burn_in()}};
}

namespace {

std::vector<LossKind> losses_from_json(const json& j, std::vector<LossKind> fallback) {
    if (!j.is_array()) return fallback;
    std::vector<LossKind> out;
    for (const auto& e : j) out.push_back(loss_kind_from_string(e.get<std::string>()));
    return out;
}

json losses_to_json(const std::vector<LossKind>& ks) {
    json a = json::array();
    for (LossKind k : ks) a.push_back(to_string(k));
    return a;
}

double scalar_drift(const PotentialModel& v, double x) {
    double out = 0.0;
    v.drift(std::span<const double>(&x, 1), std::span<double>(&out, 1));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Exit oracle

Grid1D ExitOracle::grid_for(const PotentialModel& v) const {
    return exit_grid_for(v, beta, exit_point, n_nodes, mass_tol, search_lo);
}

std::pair<double, double> ExitOracle::moments(const PotentialModel& v) const {
    return solve_exit_moments(v, beta, grid_for(v)).evaluated_at(x0);
}

double ExitOracle::functional(const PotentialModel& v, const ScalarFn& source) const {
    const Grid1D g = grid_for(v);
    const Vector w = solve_exit_functional([&](double x) { return scalar_drift(v, x); }, beta, g,
                                           source);
    return interpolate(g, w, x0);
}

double stopped_path_kl(const ExitOracle& oracle, const PotentialModel& a, const PotentialModel& b) {
    const double c = 0.25 * oracle.beta;
    return oracle.functional(a, [&](double x) {
        const double u = scalar_drift(a, x) - scalar_drift(b, x);
        return c * u * u;
    });
}

// ---------------------------------------------------------------------------
// Gradient checks

std::vector<GradCheckRow> check_rer_gradient_quadrature(const PotentialModel& reference,
                                                        const PotentialModel& surrogate,
                                                        double beta, bool reverse,
                                                        std::size_t n_nodes, double h) {
    const auto bounds = gibbs_support(reverse ? surrogate : reference, beta);
    auto batch_for = [&](const PotentialModel& sur) {
        return ReferenceBatch::from_weighted(
            gibbs_quadrature(reverse ? sur : reference, beta, n_nodes, bounds), reference);
    };
    const ReferenceBatch batch = batch_for(surrogate);
    const Vector analytic = reverse ? grad_rer_reverse(batch, surrogate, beta)
                                    : grad_rer_forward(batch, surrogate, beta);
    auto loss = [&](const Vector& th) {
        const auto sur = surrogate.with_params(th);
        return relative_entropy_rate(batch_for(*sur), *sur, beta);
    };
    return fd_gradient_check(loss, surrogate.params(), analytic, h, FdMode::Deterministic);
}

std::vector<GradCheckRow> check_second_moment_gradient_crn(const ObservableSpec& spec,
                                                           const PotentialModel& surrogate,
                                                           double beta, const Vector& x0,
                                                           std::size_t n_path, double dt,
                                                           std::uint64_t seed, double h) {
    const ObservableBatch paths =
        sample_observable_batch(spec, surrogate, beta, x0, n_path, dt, seed, true);
    const Vector analytic = grad_second_moment(paths, surrogate);
    auto loss = [&](const Vector& th) {
        const auto sur = surrogate.with_params(th);
        return sample_observable_batch(spec, *sur, beta, x0, n_path, dt, seed, false)
            .moments()
            .second_moment;
    };
    return fd_gradient_check(loss, surrogate.params(), analytic, h, FdMode::CommonRandomNumbers);
}

std::vector<GradCheckRow> check_go_gradient_crn(const LossSpec& spec,
                                                const PotentialModel& reference,
                                                const PotentialModel& surrogate, double beta,
                                                const Vector& x0, const StateSet& forward_states,
                                                const LmcConfig& lmc, std::uint64_t seed,
                                                double h) {
    const std::uint64_t path_seed = mix64(seed ^ 0x9a7);
    const std::uint64_t state_seed = mix64(seed ^ 0x57a);
    auto batch_for = [&](const PotentialModel& sur) {
        if (!is_reverse(spec.kind)) return ReferenceBatch::from_samples(forward_states, reference);
        const auto handle = sur.with_params(sur.params());
        return ReferenceBatch::from_samples(
            sample_invariant_lmc(SdeSystem::langevin(handle, beta, x0), lmc,
                                 RngStream{state_seed, 0}),
            reference);
    };
    auto paths_for = [&](const PotentialModel& sur) {
        return sample_observable_batch(spec.observable, sur, beta, x0, spec.n_path, spec.dt,
                                       path_seed, true);
    };
    const GradientEstimate g =
        grad_go_loss(spec, batch_for(surrogate), surrogate, paths_for(surrogate), beta);
    auto loss = [&](const Vector& th) {
        const auto sur = surrogate.with_params(th);
        return go_loss_inexact(spec, batch_for(*sur), *sur, paths_for(*sur), beta).value;
    };
    return fd_gradient_check(loss, surrogate.params(), g.grad, h, FdMode::CommonRandomNumbers);
}

double normwise_rel_error(const std::vector<GradCheckRow>& rows) {
    double num = 0.0, den = 0.0;
    for (const auto& r : rows) {
        num += (r.analytic - r.fd) * (r.analytic - r.fd);
        den += r.fd * r.fd;
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// ---------------------------------------------------------------------------
// Bound scan

BoundScanConfig BoundScanConfig::from_json(const json& j) {
    BoundScanConfig c;
    c.theta_star = j.value("theta_star", c.theta_star);
    c.theta_lo = j.value("theta_lo", c.theta_lo);
    c.theta_hi = j.value("theta_hi", c.theta_hi);
    c.n_theta = j.value("n_theta", c.n_theta);
    c.beta = j.value("beta", c.beta);
    c.x0 = j.value("x0", c.x0);
    c.exit_point = j.value("exit_point", c.exit_point);
    c.fk_nodes = j.value("fk_nodes", c.fk_nodes);
    c.quad_nodes = j.value("quad_nodes", c.quad_nodes);
    if (c.n_theta < 1) throw ConfigError("bound scan needs at least one theta");
    return c;
}

json BoundScanConfig::to_json() const {
    return {{"experiment", "bound_scan_dw"}, {"theta_star", theta_star}, {"theta_lo", theta_lo},
            {"theta_hi", theta_hi},         {"n_theta", n_theta},       {"beta", beta},
            {"x0", x0},                     {"exit_point", exit_point}, {"fk_nodes", fk_nodes},
            {"quad_nodes", quad_nodes}};
}

BoundScanResult run_bound_scan(const BoundScanConfig& c) {
    const DoubleWellPotential ref(c.theta_star);
    ExitOracle oracle;
    oracle.beta = c.beta;
    oracle.x0 = c.x0;
    oracle.exit_point = c.exit_point;
    oracle.n_nodes = c.fk_nodes;
    const auto [m1_ref, m2_ref] = oracle.moments(ref);
    const auto ref_support = gibbs_support(ref, c.beta);
    const WeightedStates pi_ref = gibbs_quadrature(ref, c.beta, c.quad_nodes, ref_support);
    constexpr double kInf = std::numeric_limits<double>::infinity();

    BoundScanResult out;
    out.go_bounds_hold = true;
    for (std::size_t i = 0; i < c.n_theta; ++i) {
        const double theta =
            c.n_theta == 1 ? c.theta_lo
                           : c.theta_lo + (c.theta_hi - c.theta_lo) * static_cast<double>(i) /
                                              static_cast<double>(c.n_theta - 1);
        const DoubleWellPotential sur(theta);
        BoundScanRow row;
        row.theta = theta;
        row.m1_ref = m1_ref;
        row.m2_ref = m2_ref;
        std::tie(row.m1_sur, row.m2_sur) = oracle.moments(sur);
        const auto sur_support = gibbs_support(sur, c.beta);
        const std::pair<double, double> both = {std::min(ref_support.first, sur_support.first),
                                                std::max(ref_support.second, sur_support.second)};
        DivergenceReport& r = row.report;
        r.abs_error_observable = std::abs(row.m1_ref - row.m1_sur);
        r.rer_forward = relative_entropy_rate(ref, sur, pi_ref, c.beta);
        r.rer_reverse = relative_entropy_rate(
            ref, sur, gibbs_quadrature(sur, c.beta, c.quad_nodes, sur_support), c.beta);
        r.path_kl_forward = stopped_path_kl(oracle, ref, sur);
        r.path_kl_reverse = stopped_path_kl(oracle, sur, ref);
        r.gibbs_kl_forward = gibbs_kl(ref, sur, c.beta, both, c.quad_nodes);
        r.gibbs_kl_reverse = gibbs_kl(sur, ref, c.beta, both, c.quad_nodes);
        r.go_bound_forward = go_error_bound(row.m2_ref, row.m2_sur, r.path_kl_forward);
        r.go_bound_reverse = go_error_bound(row.m2_ref, row.m2_sur, r.path_kl_reverse);
        r.ckp_bound = ckp_bound(kInf, r.path_kl_forward);  // exit time is unbounded

        if (r.go_bound_forward < r.abs_error_observable ||
            r.go_bound_reverse < r.abs_error_observable) {
            out.go_bounds_hold = false;
        }
        const double kl_min = std::min({r.path_kl_forward, r.path_kl_reverse, r.gibbs_kl_forward,
                                        r.gibbs_kl_reverse});
        if (kl_min < r.abs_error_observable) out.kl_below_error_somewhere = true;
        if (std::abs(theta - c.theta_star) < 1e-12) {
            const double worst = std::max({r.abs_error_observable, r.rer_forward, r.rer_reverse,
                                           r.path_kl_forward, r.path_kl_reverse,
                                           r.gibbs_kl_forward, r.gibbs_kl_reverse});
            out.zero_at_reference = worst <= 1e-6;
        }
        out.rows.push_back(row);
    }
    return out;
}

void write_bound_scan(const BoundScanResult& r, const fs::path& out_dir) {
    std::vector<std::pair<double, DivergenceReport>> rows;
    std::vector<std::array<double, 3>> oracle;
    for (const auto& row : r.rows) {
        rows.emplace_back(row.theta, row.report);
        oracle.push_back({row.theta, row.m1_sur, row.m2_sur});
    }
    bound_scan_table(rows).write(out_dir / "bound_scan.csv");
    oracle_table(oracle).write(out_dir / "oracle_moments.csv");
}

// ---------------------------------------------------------------------------
// Gaussian mixture

GmmExperimentConfig::GmmExperimentConfig()
    : theta_star{1.0, 1.0, -1.0, 1.0, std::log(0.2), std::log(0.2)},
      theta0{1.0, 1.0, -1.0, -1.0, std::log(0.75), std::log(0.75)} {
    lmc.n_steps = 1'000'000;
    lmc.dt = 1e-3;
    lmc.n_samp = n_samp;
}

GmmExperimentConfig GmmExperimentConfig::from_json(const json& j, bool paper_scale) {
    GmmExperimentConfig c;
    if (paper_scale) c.max_iters = 500;
    c.theta_star = j.value("theta_star", c.theta_star);
    c.theta0 = j.value("theta0", c.theta0);
    c.quartic = j.value("quartic", c.quartic);
    c.beta = j.value("beta", c.beta);
    c.x0 = j.value("x0", c.x0);
    c.exit_point = j.value("exit_point", c.exit_point);
    c.t_cap = j.value("t_cap", c.t_cap);
    c.losses = losses_from_json(j.value("losses", json()), c.losses);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.n_samp = j.value("n_samp", c.n_samp);
    c.n_path = j.value("n_path", c.n_path);
    c.dt = j.value("dt", c.dt);
    c.lmc = lmc_from_json(j.value("lmc", json::object()), c.lmc);
    c.seed = j.value("seed", c.seed);
    c.fk_nodes = j.value("fk_nodes", c.fk_nodes);
    c.quad_nodes = j.value("quad_nodes", c.quad_nodes);
    if (j.contains("m_phi") && j.at("m_phi").is_number()) c.m_phi = j.at("m_phi").get<double>();
    if (c.theta_star.size() != 6 || c.theta0.size() != 6) {
        throw ConfigError("gaussian mixture parameters have six entries");
    }
    return c;
}

json GmmExperimentConfig::to_json() const {
    return {{"experiment", "train_gmm"},
            {"theta_star", theta_star},
            {"theta0", theta0},
            {"quartic", quartic},
            {"beta", beta},
            {"x0", x0},
            {"exit_point", exit_point},
            {"t_cap", t_cap},
            {"losses", losses_to_json(losses)},
            {"max_iters", max_iters},
            {"learning_rate", learning_rate},
            {"n_samp", n_samp},
            {"n_path", n_path},
            {"dt", dt},
            {"lmc", lmc_to_json(lmc)},
            {"seed", seed},
            {"fk_nodes", fk_nodes},
            {"quad_nodes", quad_nodes},
            {"m_phi", m_phi ? json(*m_phi) : json("oracle")}};
}

ExitOracle GmmExperimentConfig::oracle() const {
    ExitOracle o;
    o.beta = beta;
    o.x0 = x0;
    o.exit_point = exit_point;
    o.n_nodes = fk_nodes;
    return o;
}

GmmDiagnostics::GmmDiagnostics(const GmmExperimentConfig& config, const PotentialModel& reference,
                               LossKind kind, double m_phi)
    : config_(config), reference_(reference), kind_(kind), m_phi_(m_phi),
      oracle_(config.oracle()) {
    std::tie(m1_ref_, m2_ref_) = oracle_.moments(reference);
    pi_ref_ = gibbs_quadrature(reference, config.beta, config.quad_nodes,
                               gibbs_support(reference, config.beta));
}

double GmmDiagnostics::rer(const PotentialModel& surrogate, bool reverse) const {
    if (!reverse) return relative_entropy_rate(reference_, surrogate, pi_ref_, config_.beta);
    const WeightedStates pi = gibbs_quadrature(surrogate, config_.beta, config_.quad_nodes,
                                               gibbs_support(surrogate, config_.beta));
    return relative_entropy_rate(reference_, surrogate, pi, config_.beta);
}

double GmmDiagnostics::go_loss(const PotentialModel& surrogate, bool reverse) const {
    const double m2 = oracle_.moments(surrogate).second;
    return go_loss_value(config_.t_cap, m_phi_, m2, rer(surrogate, reverse));
}

IterateDiagnostics GmmDiagnostics::operator()(const PotentialModel& surrogate) const {
    IterateDiagnostics d;
    const auto [m1, m2] = oracle_.moments(surrogate);
    d.oracle_mean = m1;
    d.oracle_variance = m2 - m1 * m1;
    d.oracle_error = m1_ref_ - m1;
    const bool reverse = is_reverse(kind_);
    const double h = rer(surrogate, reverse);
    if (is_goal_oriented(kind_)) {
        d.deterministic_loss = go_loss_value(config_.t_cap, m_phi_, m2, h);
    } else if (kind_ == LossKind::FM) {
        d.deterministic_loss = 4.0 / config_.beta * h;
    } else {
        d.deterministic_loss = 4.0 * h;
    }
    return d;
}

const GmmRun* GmmResult::find(LossKind k) const {
    for (const auto& r : runs) {
        if (r.kind == k) return &r;
    }
    return nullptr;
}

GmmResult run_gmm_experiment(const GmmExperimentConfig& c) {
    const GaussianMixturePotential reference(c.theta_star, c.quartic);
    const GaussianMixturePotential initial(c.theta0, c.quartic);
    GmmResult out;
    std::tie(out.m1_ref, out.m2_ref) = c.oracle().moments(reference);
    out.m_phi = c.m_phi.value_or(out.m2_ref);

    for (LossKind kind : c.losses) {
        TrainConfig tc;
        tc.loss.kind = kind;
        tc.loss.m_phi = out.m_phi;
        tc.loss.horizon = c.t_cap;
        tc.loss.n_path = c.n_path;
        tc.loss.dt = c.dt;
        tc.loss.observable.kind = ObservableKind::FirstExit;
        tc.loss.observable.region =
            Region::interval(-std::numeric_limits<double>::infinity(), c.exit_point);
        tc.loss.observable.t_cap = c.t_cap;
        tc.optimizer = OptimizerKind::AdaGrad;
        tc.learning_rate = c.learning_rate;
        tc.max_iters = c.max_iters;
        tc.n_samp = c.n_samp;
        tc.lmc = c.lmc;
        tc.beta = c.beta;
        tc.x0 = {c.x0};
        tc.seed = c.seed;  // same data and noise lineage for every loss

        const GmmDiagnostics diag(c, reference, kind, out.m_phi);
        TrainHooks hooks;
        hooks.diagnose = [&](const PotentialModel& m) { return diag(m); };
        out.runs.push_back({kind, train(tc, reference, initial, {}, hooks)});
    }
    return out;
}

void write_gmm(const GmmResult& r, const fs::path& out_dir) {
    for (const auto& run : r.runs) {
        const std::string name = to_string(run.kind);
        loss_table(name, run.trace).write(out_dir / ("loss_" + name + ".csv"));
        trace_table(name, run.trace).write(out_dir / ("trace_" + name + ".csv"));
        std::vector<std::pair<long long, MomentEstimate>> moments;
        for (const auto& rec : run.trace.records) {
            MomentEstimate m;
            m.mean = rec.diagnostics.oracle_mean;
            m.variance = rec.diagnostics.oracle_variance;
            m.second_moment = m.variance + m.mean * m.mean;
            m.std_error_mean = 0.0;
            moments.emplace_back(static_cast<long long>(rec.iter), m);
        }
        moments_table(moments).write(out_dir / ("moments_" + name + ".csv"));
        write_json(out_dir / ("checkpoint_" + name + ".json"), run.trace.checkpoint.to_json());
    }
    CsvTable ref("reference", {"m1", "m2", "m_phi"});
    ref.add_row({r.m1_ref, r.m2_ref, r.m_phi});
    ref.write(out_dir / "reference.csv");
}

// ---------------------------------------------------------------------------
// Muller-Brown

MbExperimentConfig::MbExperimentConfig() {
    mlp.input_dim = 2;
    mlp.hidden = {20};
    mlp.quartic = 0.2;
    mlp.center = {-0.5, 0.75};
    mlp.init_seed = 7;
    mlp.init_scale = 1.0;
}

MbExperimentConfig MbExperimentConfig::from_json(const json& j, bool paper_scale) {
    MbExperimentConfig c;
    if (paper_scale) {
        c.trials = 10;
        c.epochs = 1000;
        c.n_samp = 5000;
        c.n_path = 100;
        c.mlp.hidden = {20, 20};
        c.eval_window = 100;
        c.t_cap = 10000.0;
    }
    c.scale = j.value("scale", c.scale);
    c.beta = j.value("beta", c.beta);
    c.x0 = j.value("x0", c.x0);
    c.ellipse_center = j.value("ellipse_center", c.ellipse_center);
    c.ellipse_axes = j.value("ellipse_axes", c.ellipse_axes);
    c.t_cap = j.value("t_cap", c.t_cap);
    c.dt = j.value("dt", c.dt);
    if (j.contains("mlp")) {
        const auto& m = j.at("mlp");
        c.mlp.hidden = m.value("hidden", c.mlp.hidden);
        c.mlp.quartic = m.value("quartic", c.mlp.quartic);
        c.mlp.center = m.value("center", c.mlp.center);
        c.mlp.init_seed = m.value("init_seed", c.mlp.init_seed);
        c.mlp.init_scale = m.value("init_scale", c.mlp.init_scale);
    }
    c.losses = losses_from_json(j.value("losses", json()), c.losses);
    c.trials = j.value("trials", c.trials);
    c.epochs = j.value("epochs", c.epochs);
    c.n_samp = j.value("n_samp", c.n_samp);
    c.n_path = j.value("n_path", c.n_path);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.pool_size = j.value("pool_size", c.pool_size);
    c.pool_thin = j.value("pool_thin", c.pool_thin);
    c.pool_dt = j.value("pool_dt", c.pool_dt);
    c.set_a_start = j.value("set_a_start", c.set_a_start);
    c.set_b_center = j.value("set_b_center", c.set_b_center);
    c.set_b_radius = j.value("set_b_radius", c.set_b_radius);
    c.ref_paths = j.value("ref_paths", c.ref_paths);
    c.eval_paths = j.value("eval_paths", c.eval_paths);
    c.eval_window = j.value("eval_window", c.eval_window);
    c.seed = j.value("seed", c.seed);
    if (c.x0.size() != 2 || c.ellipse_center.size() != 2 || c.ellipse_axes.size() != 2) {
        throw ConfigError("Muller-Brown states are two-dimensional");
    }
    if (c.eval_window < 1 || c.eval_window > c.epochs + 1) {
        throw ConfigError("eval_window must lie in [1, epochs + 1]");
    }
    if (c.trials < 1) throw ConfigError("at least one trial is required");
    return c;
}

json MbExperimentConfig::to_json() const {
    return {{"experiment", "train_mb_robustness"},
            {"scale", scale},
            {"beta", beta},
            {"x0", x0},
            {"ellipse_center", ellipse_center},
            {"ellipse_axes", ellipse_axes},
            {"t_cap", t_cap},
            {"dt", dt},
            {"mlp",
             {{"hidden", mlp.hidden},
              {"quartic", mlp.quartic},
              {"center", mlp.center},
              {"init_seed", mlp.init_seed},
              {"init_scale", mlp.init_scale}}},
            {"losses", losses_to_json(losses)},
            {"trials", trials},
            {"epochs", epochs},
            {"n_samp", n_samp},
            {"n_path", n_path},
            {"learning_rate", learning_rate},
            {"pool_size", pool_size},
            {"pool_thin", pool_thin},
            {"pool_dt", pool_dt},
            {"set_a_start", set_a_start},
            {"set_b_center", set_b_center},
            {"set_b_radius", set_b_radius},
            {"ref_paths", ref_paths},
            {"eval_paths", eval_paths},
            {"eval_window", eval_window},
            {"seed", seed}};
}

ObservableSpec MbExperimentConfig::observable() const {
    ObservableSpec s;
    s.kind = ObservableKind::FirstHit;
    s.region = Region::ellipse(ellipse_center, ellipse_axes);
    s.t_cap = t_cap;
    return s;
}

std::uint64_t MbExperimentConfig::subset_seed(std::size_t trial, char dataset) const {
    return mix64(seed ^ 0x5b5eULL ^ (static_cast<std::uint64_t>(trial) << 8) ^
                 static_cast<std::uint64_t>(dataset));
}

Region MbExperimentConfig::set_b_region() const {
    return Region::ellipse(set_b_center, {set_b_radius, set_b_radius});
}

namespace {

constexpr std::uint64_t kPoolA = 0xa11a;
constexpr std::uint64_t kPoolB = 0xb11b;
constexpr std::uint64_t kRefPaths = 0x4ef;
constexpr std::uint64_t kEvalPaths = 0xe7a1;
constexpr std::uint64_t kTrainSeed = 0x7a11;

/// Thinned Euler-Maruyama chain; proposals rejected by `keep` leave the state unchanged.
StateSet thinned_chain(const PotentialModel& v, double beta, Vector x, double dt, std::size_t n,
                       std::size_t thin, std::size_t burn_in, std::uint64_t seed,
                       const Region* keep) {
    NormalSource src(RngStream{seed, 0});
    const std::size_t m = v.dim();
    const double sq = std::sqrt(dt * 2.0 / beta);
    Vector b(m), xi(m), y(m);
    StateSet out(m);
    out.data.reserve(n * m);
    const std::size_t total = burn_in + n * thin;
    for (std::size_t k = 1; k <= total; ++k) {
        v.drift(x, b);
        src.fill(xi);
        for (std::size_t i = 0; i < m; ++i) {
            if (!std::isfinite(b[i])) throw NonFiniteDrift(k, "chain");
            y[i] = x[i] + dt * b[i] + sq * xi[i];
        }
        if (!keep || keep->contains(y)) x = y;
        if (k > burn_in && (k - burn_in) % thin == 0) out.push_back(x);
    }
    return out;
}

double median(Vector v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

MbPools generate_mb_pools(const MbExperimentConfig& c, const PotentialModel& reference) {
    MbPools p;
    const std::size_t burn = c.pool_size * c.pool_thin / 10;
    p.set_a = thinned_chain(reference, c.beta, c.set_a_start, c.pool_dt, c.pool_size, c.pool_thin,
                            burn, mix64(c.seed ^ kPoolA), nullptr);
    const Region disc = c.set_b_region();
    p.set_b = thinned_chain(reference, c.beta, c.set_b_center, c.pool_dt, c.pool_size, c.pool_thin,
                            burn, mix64(c.seed ^ kPoolB), &disc);
    return p;
}

StateSet subsample(const StateSet& pool, std::size_t n, std::uint64_t seed) {
    if (n > pool.size()) throw InsufficientChain("subset larger than its pool");
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<std::size_t> pick;
    pick.reserve(n);
    std::mt19937_64 eng(seed);
    std::sample(idx.begin(), idx.end(), std::back_inserter(pick), n, eng);
    StateSet out(pool.dim);
    out.data.reserve(n * pool.dim);
    for (std::size_t i : pick) out.push_back(pool[i]);
    return out;
}

double MbResult::median_error(LossKind k, char dataset) const {
    Vector v;
    for (const auto& r : runs) {
        if (r.kind == k && r.dataset == dataset) v.push_back(r.final_error);
    }
    return median(v);
}

double MbResult::error_ratio(LossKind k) const {
    return median_error(k, 'B') / median_error(k, 'A');
}

MbResult run_mb_experiment(const MbExperimentConfig& c) {
    const MullerBrownPotential reference(c.scale);
    const ObservableSpec obs = c.observable();
    MbResult out;
    {
        const auto ref = std::make_shared<MullerBrownPotential>(c.scale);
        out.reference = estimate_moments(obs, SdeSystem::langevin(ref, c.beta, c.x0), c.ref_paths,
                                         c.dt, mix64(c.seed ^ kRefPaths));
    }
    const double mu_ref = out.reference.mean;
    const MbPools pools = generate_mb_pools(c, reference);
    const std::uint64_t eval_seed = mix64(c.seed ^ kEvalPaths);

    for (std::size_t trial = 0; trial < c.trials; ++trial) {
        MlpConfig arch = c.mlp;
        arch.init_seed = c.mlp.init_seed + trial;
        const MlpPotential initial(arch);  // shared by every loss and dataset of the trial
        for (char dataset : {'A', 'B'}) {
            const StateSet& pool = dataset == 'A' ? pools.set_a : pools.set_b;
            const StateSet data =
                subsample(pool, c.n_samp, c.subset_seed(trial, dataset));
            for (LossKind kind : c.losses) {
                TrainConfig tc;
                tc.loss.kind = kind;
                tc.loss.horizon = c.t_cap;
                tc.loss.n_path = c.n_path;
                tc.loss.dt = c.dt;
                tc.loss.observable = obs;
                tc.optimizer = OptimizerKind::AdaGrad;
                tc.learning_rate = c.learning_rate;
                tc.max_iters = c.epochs;
                tc.n_samp = c.n_samp;
                tc.beta = c.beta;
                tc.x0 = c.x0;
                tc.seed = mix64(c.seed ^ kTrainSeed ^ trial);

                const std::size_t first_eval = c.epochs + 1 - c.eval_window;
                std::size_t iter = 0;
                TrainHooks hooks;
                hooks.diagnose = [&](const PotentialModel& m) {
                    IterateDiagnostics d;
                    if (iter++ < first_eval) return d;
                    const auto handle = m.with_params(m.params());
                    const MomentEstimate e = estimate_moments(
                        obs, SdeSystem::langevin(handle, c.beta, c.x0), c.eval_paths, c.dt,
                        eval_seed);
                    d.oracle_mean = e.mean;
                    d.oracle_variance = e.variance;
                    d.oracle_error = mu_ref - e.mean;
                    return d;
                };
                MbRun run{kind, dataset, trial, train(tc, reference, initial, {data}, hooks), 0.0};
                double s = 0.0;
                std::size_t n = 0;
                for (const auto& rec : run.trace.records) {
                    if (std::isfinite(rec.diagnostics.oracle_error)) {
                        s += 0.5 * rec.diagnostics.oracle_error * rec.diagnostics.oracle_error;
                        ++n;
                    }
                }
                run.final_error = n ? s / static_cast<double>(n)
                                    : std::numeric_limits<double>::infinity();
                out.runs.push_back(std::move(run));
            }
        }
    }
    return out;
}

void write_mb(const MbResult& r, const fs::path& out_dir) {
    CsvTable summary("mb_summary",
                     {"loss_kind", "dataset", "trial", "status", "final_error", "iterations"});
    for (const auto& run : r.runs) {
        const std::string name = to_string(run.kind) + "_" + std::string(1, run.dataset) + "_t" +
                                 std::to_string(run.trial);
        trace_table(to_string(run.kind), run.trace).write(out_dir / ("trace_" + name + ".csv"));
        summary.add_row({to_string(run.kind), std::string(1, run.dataset),
                         static_cast<long long>(run.trial), to_string(run.trace.status),
                         run.final_error, static_cast<long long>(run.trace.records.size())});
    }
    summary.write(out_dir / "mb_summary.csv");
    moments_table({{0, r.reference}}).write(out_dir / "reference_moments.csv");
}

}  // namespace golearn
