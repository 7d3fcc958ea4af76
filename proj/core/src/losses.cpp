#include "golearn/losses.hpp"

#include <cmath>

namespace golearn {

std::string to_string(LossKind k) {
    switch (k) {
        case LossKind::EM: return "EM";
        case LossKind::FM: return "FM";
        case LossKind::RER_F: return "RER-f";
        case LossKind::RER_R: return "RER-r";
        case LossKind::GO_F: return "GO-f";
        case LossKind::GO_R: return "GO-r";
    }
    return "?";
}

LossKind loss_kind_from_string(const std::string& s) {
    for (LossKind k : {LossKind::EM, LossKind::FM, LossKind::RER_F, LossKind::RER_R, LossKind::GO_F,
                       LossKind::GO_R}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown loss kind: " + s);
}

bool is_reverse(LossKind k) { return k == LossKind::RER_R || k == LossKind::GO_R; }
bool is_goal_oriented(LossKind k) { return k == LossKind::GO_F || k == LossKind::GO_R; }

ReferenceBatch ReferenceBatch::from_weighted(WeightedStates pi, const PotentialModel& reference) {
    if (pi.states.dim != reference.dim()) throw DimMismatch("reference batch dimension mismatch");
    ReferenceBatch b;
    const std::size_t n = pi.size();
    b.drift = StateSet(reference.dim());
    b.drift.data.resize(n * reference.dim());
    b.energy.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        reference.drift(pi.states[j], b.drift[j]);
        b.energy[j] = reference.value(pi.states[j]);
    }
    b.pi = std::move(pi);
    return b;
}

ReferenceBatch ReferenceBatch::from_samples(StateSet states, const PotentialModel& reference) {
    return from_weighted(WeightedStates::uniform(std::move(states)), reference);
}

double LossSpec::resolve_m_phi(double surrogate_second_moment) const {
    if (m_phi) return *m_phi;
    return m_phi_safety * surrogate_second_moment;
}

namespace {

void require_data(const ReferenceBatch& data, const PotentialModel& surrogate) {
    if (data.pi.empty()) throw EmptyDataset("loss evaluated on an empty dataset");
    if (data.pi.states.dim != surrogate.dim()) throw DimMismatch("dataset dimension mismatch");
}

double mean_drift_gap(const ReferenceBatch& data, const PotentialModel& surrogate) {
    require_data(data, surrogate);
    const std::size_t m = surrogate.dim();
    Vector bt(m);
    double s = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j) {
        surrogate.drift(data.pi.states[j], bt);
        const auto b = data.drift[j];
        double q = 0.0;
        for (std::size_t i = 0; i < m; ++i) q += (b[i] - bt[i]) * (b[i] - bt[i]);
        s += data.pi.weights[j] * q;
    }
    return s;
}

}  // namespace

double em_loss(const ReferenceBatch& data, const PotentialModel& surrogate) {
    require_data(data, surrogate);
    if (data.energy.size() != data.size()) throw EmptyDataset("dataset has no reference energies");
    double s = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const double r = data.energy[j] - surrogate.value(data.pi.states[j]);
        s += data.pi.weights[j] * r * r;
    }
    return s;
}

double fm_loss(const ReferenceBatch& data, const PotentialModel& surrogate) {
    return mean_drift_gap(data, surrogate);
}

double rer_loss(const ReferenceBatch& data, const PotentialModel& surrogate, double beta) {
    return beta * mean_drift_gap(data, surrogate);
}

double relative_entropy_rate(const ReferenceBatch& data, const PotentialModel& surrogate,
                             double beta) {
    return 0.25 * beta * mean_drift_gap(data, surrogate);
}

LossValue go_loss_inexact(const LossSpec& spec, const ReferenceBatch& data,
                          const PotentialModel& surrogate, const ObservableBatch& paths,
                          double beta) {
    if (paths.fingerprint != surrogate.fingerprint()) {
        throw StalePathError("paths were simulated under different parameters");
    }
    if (paths.size() == 0) throw EmptyDataset("no surrogate paths");
    LossValue v;
    double s2 = 0.0;
    for (double p : paths.phi) s2 += p * p;
    v.second_moment_term = s2 / static_cast<double>(paths.size());
    v.rer_term = relative_entropy_rate(data, surrogate, beta);
    v.m_phi = spec.resolve_m_phi(v.second_moment_term);
    v.value = go_loss_value(spec.horizon, v.m_phi, v.second_moment_term, v.rer_term);
    return v;
}

double go_loss_value(double horizon, double m_phi, double surrogate_second_moment, double rer) {
    return horizon * (m_phi + surrogate_second_moment) * rer;
}

nlohmann::json to_json(const LossValue& v) {
    return {{"value", v.value},
            {"second_moment_term", v.second_moment_term},
            {"rer_term", v.rer_term},
            {"m_phi", v.m_phi}};
}

}  // namespace golearn
