// golearn: command-line front end for the goal-oriented drift-learning library.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "golearn/experiments.hpp"
#include "golearn/fk_oracle.hpp"
#include "golearn/io.hpp"
#include "golearn/quadrature.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace golearn;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    bool paper_scale = false;

    json load() const {
        json j = config_path.empty() ? json::object() : read_json(config_path);
        if (seed) j["seed"] = *seed;
        return j;
    }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Override the configured seed");
    cmd->add_option("--out-dir", c.out_dir, "Directory for CSV/JSON artifacts");
    cmd->add_flag("--paper-scale", c.paper_scale, "Use the full-size experiment settings");
}

int report(bool ok, const std::string& what) {
    std::printf("%s: %s\n", ok ? "PASS" : "FAIL", what.c_str());
    return ok ? 0 : 1;
}

int cmd_bound_scan(const Common& c) {
    const BoundScanConfig cfg = BoundScanConfig::from_json(c.load());
    const BoundScanResult r = run_bound_scan(cfg);
    write_bound_scan(r, c.out_dir);
    write_json(fs::path(c.out_dir) / "config.json", cfg.to_json());
    int fails = 0;
    fails += report(r.go_bounds_hold, "GO-f and GO-r bounds dominate |error| on every row");
    fails += report(r.zero_at_reference, "divergences and error vanish at theta*");
    std::printf("info: some KL curve falls below |error|: %s\n",
                r.kl_below_error_somewhere ? "yes" : "no");
    return fails ? 1 : 0;
}

int train_gmm(const Common& c, const json& j) {
    const GmmExperimentConfig cfg = GmmExperimentConfig::from_json(j, c.paper_scale);
    const GmmResult r = run_gmm_experiment(cfg);
    write_gmm(r, c.out_dir);
    write_json(fs::path(c.out_dir) / "config.json", cfg.to_json());
    int fails = 0;
    for (const auto& run : r.runs) {
        const std::string name = to_string(run.kind);
        fails += report(run.trace.status == TrainStatus::Completed ||
                            run.trace.status == TrainStatus::Converged,
                        name + " run finished (" + to_string(run.trace.status) + ")");
        if (!is_goal_oriented(run.kind)) continue;
        bool holds = true;
        for (const auto& rec : run.trace.records) {
            const double e = rec.diagnostics.oracle_error;
            if (rec.diagnostics.deterministic_loss < 0.5 * e * e - 1e-8) holds = false;
        }
        fails += report(holds, name + " deterministic loss >= error^2 / 2 at every iterate");
    }
    if (const GmmRun* go = r.find(LossKind::GO_R); go && !go->trace.records.empty()) {
        const double e0 = std::abs(go->trace.records.front().diagnostics.oracle_error);
        double best = e0;
        for (const auto& rec : go->trace.records) {
            best = std::min(best, std::abs(rec.diagnostics.oracle_error));
        }
        std::printf("info: GO-r |error| initial %.6g, best %.6g, final %.6g\n", e0, best,
                    std::abs(go->trace.records.back().diagnostics.oracle_error));
    }
    return fails ? 1 : 0;
}

int train_mb(const Common& c, const json& j) {
    const MbExperimentConfig cfg = MbExperimentConfig::from_json(j, c.paper_scale);
    const MbResult r = run_mb_experiment(cfg);
    write_mb(r, c.out_dir);
    write_json(fs::path(c.out_dir) / "config.json", cfg.to_json());
    for (LossKind k : cfg.losses) {
        std::printf("info: %s median error A %.6g, B %.6g, ratio %.6g\n", to_string(k).c_str(),
                    r.median_error(k, 'A'), r.median_error(k, 'B'), r.error_ratio(k));
    }
    const double go = r.error_ratio(LossKind::GO_F);
    const bool ok = go <= r.error_ratio(LossKind::EM) && go <= r.error_ratio(LossKind::FM);
    return report(ok, "GO B/A error ratio does not exceed the EM and FM ratios");
}

int train_custom(const Common& c, const json& j) {
    const PotentialPtr ref = potential_from_json(j.at("reference"));
    const PotentialPtr sur = potential_from_json(j.at("surrogate"));
    TrainConfig tc;
    tc.loss.kind = loss_kind_from_string(j.value("loss", std::string("GO-r")));
    if (j.contains("m_phi") && j.at("m_phi").is_number()) tc.loss.m_phi = j.at("m_phi").get<double>();
    tc.loss.horizon = j.value("horizon", tc.loss.horizon);
    tc.loss.n_path = j.value("n_path", tc.loss.n_path);
    tc.loss.dt = j.value("dt", tc.loss.dt);
    if (j.contains("observable")) tc.loss.observable = observable_from_json(j.at("observable"));
    tc.optimizer = optimizer_from_string(j.value("optimizer", std::string("adagrad")));
    tc.learning_rate = j.value("learning_rate", tc.learning_rate);
    tc.max_iters = j.value("max_iters", tc.max_iters);
    tc.eps_theta = j.value("eps_theta", tc.eps_theta);
    tc.eps_loss = j.value("eps_loss", tc.eps_loss);
    tc.n_samp = j.value("n_samp", tc.n_samp);
    tc.lmc = lmc_from_json(j.value("lmc", json::object()), tc.lmc);
    tc.beta = j.value("beta", tc.beta);
    tc.x0 = j.at("x0").get<Vector>();
    tc.seed = j.value("seed", tc.seed);
    std::optional<TrainCheckpoint> resume;
    if (j.contains("resume")) {
        resume = TrainCheckpoint::from_json(read_json(j.at("resume").get<std::string>()));
    }
    const TrainTrace t = train(tc, *ref, *sur, {}, {}, resume);
    const std::string name = to_string(tc.loss.kind);
    trace_table(name, t).write(fs::path(c.out_dir) / ("trace_" + name + ".csv"));
    loss_table(name, t).write(fs::path(c.out_dir) / ("loss_" + name + ".csv"));
    write_json(fs::path(c.out_dir) / ("checkpoint_" + name + ".json"), t.checkpoint.to_json());
    return report(t.status == TrainStatus::Completed || t.status == TrainStatus::Converged,
                  "training finished (" + to_string(t.status) + ")" +
                      (t.message.empty() ? "" : ": " + t.message));
}

int cmd_train(const Common& c) {
    const json j = c.load();
    const std::string exp = j.value("experiment", std::string("train_gmm"));
    if (exp == "train_gmm") return train_gmm(c, j);
    if (exp == "train_mb_robustness") return train_mb(c, j);
    if (exp == "custom") return train_custom(c, j);
    throw ConfigError("unknown experiment: " + exp);
}

int cmd_dataset(const Common& c) {
    const json j = c.load();
    const MbExperimentConfig cfg = MbExperimentConfig::from_json(j, c.paper_scale);
    const MullerBrownPotential ref(cfg.scale);
    const MbPools pools = generate_mb_pools(cfg, ref);
    const fs::path out = c.out_dir;
    write_states_binary(out / "pool_A.bin", pools.set_a);
    write_states_binary(out / "pool_B.bin", pools.set_b);
    states_table(pools.set_a, &ref).write(out / "pool_A.csv");
    states_table(pools.set_b, &ref).write(out / "pool_B.csv");
    const Region disc = cfg.set_b_region();
    const Region target = cfg.observable().region;
    bool contained = true;
    for (std::size_t i = 0; i < pools.set_b.size(); ++i) {
        if (!disc.contains(pools.set_b[i]) || target.contains(pools.set_b[i])) contained = false;
    }
    json seeds = json::array();
    bool sizes_ok = true;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        for (char d : {'A', 'B'}) {
            const std::uint64_t s = cfg.subset_seed(t, d);
            const StateSet sub = subsample(d == 'A' ? pools.set_a : pools.set_b, cfg.n_samp, s);
            sizes_ok = sizes_ok && sub.size() == cfg.n_samp;
            const std::string name = std::string("subset_") + d + "_t" + std::to_string(t) + ".csv";
            states_table(sub, &ref).write(out / name);
            seeds.push_back({{"file", name}, {"seed", s}});
        }
    }
    write_json(out / "datasets.json", {{"config", cfg.to_json()}, {"subsets", seeds}});
    int fails = 0;
    fails += report(sizes_ok, "every subset has exactly n_samp states");
    fails += report(contained, "set B stays in its disc and outside the target ellipse");
    return fails ? 1 : 0;
}

int cmd_estimate(const Common& c) {
    const json j = c.load();
    const PotentialPtr v = potential_from_json(j.at("potential"));
    const double beta = j.value("beta", 1.0);
    const Vector x0 = j.at("x0").get<Vector>();
    const ObservableSpec obs = observable_from_json(j.at("observable"));
    const auto n = j.value("n_paths", std::size_t{1000});
    const double dt = j.value("dt", 1e-3);
    const std::uint64_t seed = j.value("seed", std::uint64_t{1});
    const MomentEstimate m = estimate_moments(obs, SdeSystem::langevin(v, beta, x0), n, dt, seed);
    moments_table({{0, m}}).write(fs::path(c.out_dir) / "moments.csv");
    std::printf("info: mean %.6g (se %.3g), second moment %.6g, capped %.3g\n", m.mean,
                m.std_error_mean, m.second_moment, m.capped_fraction);
    if (v->dim() == 1 && obs.kind == ObservableKind::FirstExit && !std::isfinite(obs.region.lower)) {
        ExitOracle o;
        o.beta = beta;
        o.x0 = x0[0];
        o.exit_point = obs.region.upper;
        const auto [m1, m2] = o.moments(*v);
        std::printf("info: oracle mean %.6g, second moment %.6g\n", m1, m2);
    }
    return report(m.n_paths == n, "all paths simulated");
}

int cmd_fk_solve(const Common& c) {
    const json j = c.load();
    const json pj = j.value("potential", json{{"kind", "double_well"}, {"theta", {0.5}}});
    ExitOracle o;
    o.beta = j.value("beta", 1.0);
    o.x0 = j.value("x0", -1.0);
    o.exit_point = j.value("exit_point", 1.0);
    o.n_nodes = j.value("n_nodes", o.n_nodes);
    std::vector<std::array<double, 3>> rows;
    const PotentialPtr base = potential_from_json(pj);
    if (j.contains("theta_grid")) {
        for (double th : j.at("theta_grid").get<Vector>()) {
            const auto v = base->with_params({th});
            const auto [m1, m2] = o.moments(*v);
            rows.push_back({th, m1, m2});
        }
    } else {
        const auto [m1, m2] = o.moments(*base);
        rows.push_back({base->params().empty() ? 0.0 : base->params()[0], m1, m2});
    }
    oracle_table(rows).write(fs::path(c.out_dir) / "oracle.csv");
    bool finite = true;
    for (const auto& r : rows) finite = finite && std::isfinite(r[1]) && r[1] > 0 && r[2] >= r[1] * r[1];
    return report(finite, "oracle moments finite with m2 >= m1^2");
}

std::string fmt_g3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

int cmd_grad_check(const Common& c) {
    const json j = c.load();
    const double beta = j.value("beta", 1.0);
    const double h = j.value("h", 1e-5);
    const std::size_t nodes = j.value("quad_nodes", std::size_t{200});
    std::vector<GradCheckRow> all;
    int fails = 0;
    auto run = [&](const std::string& label, const PotentialModel& ref, const PotentialModel& sur) {
        for (bool reverse : {false, true}) {
            auto rows = check_rer_gradient_quadrature(ref, sur, beta, reverse, nodes, h);
            const double err = normwise_rel_error(rows);
            fails += report(err <= 1e-5, label + (reverse ? " reverse" : " forward") +
                                             " RER gradient vs FD (rel err " +
                                             fmt_g3(err) + ")");
            all.insert(all.end(), rows.begin(), rows.end());
        }
    };
    const DoubleWellPotential dw_ref(0.5), dw_sur(j.value("dw_theta", 0.2));
    run("double well", dw_ref, dw_sur);
    const GmmExperimentConfig g;
    const GaussianMixturePotential gm_ref(g.theta_star), gm_sur(g.theta0);
    run("gaussian mixture", gm_ref, gm_sur);
    grad_check_table(all).write(fs::path(c.out_dir) / "grad_check.csv");
    return fails ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goal-oriented learning of surrogate Langevin drifts"};
    app.require_subcommand(1);
    Common common;
    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const Common&);
    };
    const Sub subs[] = {
        {"bound-scan", "Double-well divergence and error-bound scan over theta", cmd_bound_scan},
        {"train", "Run a training experiment (train_gmm, train_mb_robustness, custom)", cmd_train},
        {"dataset", "Generate Muller-Brown data pools and training subsets", cmd_dataset},
        {"estimate", "Monte Carlo moments of a path observable", cmd_estimate},
        {"fk-solve", "Feynman-Kac exit-time moments for a 1-D potential", cmd_fk_solve},
        {"grad-check", "Quadrature gradient checks against finite differences", cmd_grad_check},
    };
    int (*chosen)(const Common&) = nullptr;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, common);
        cmd->callback([&chosen, fn = s.fn] { chosen = fn; });
    }
    CLI11_PARSE(app, argc, argv);
    try {
        return chosen ? chosen(common) : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
