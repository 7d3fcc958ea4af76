#include "golearn/gradients.hpp"

#include <algorithm>
#include <cmath>

namespace golearn {

namespace {

/// Running mean and standard error of vector-valued samples with weights.
struct VectorMoments {
    Vector s1, s2;
    explicit VectorMoments(std::size_t d) : s1(d, 0.0), s2(d, 0.0) {}

    void add(double w, std::span<const double> v) {
        for (std::size_t p = 0; p < s1.size(); ++p) {
            s1[p] += w * v[p];
            s2[p] += w * v[p] * v[p];
        }
    }
    /// Standard error assuming `n` equally weighted samples.
    Vector std_error(std::size_t n) const {
        Vector se(s1.size(), 0.0);
        if (n < 2) return se;
        const double dn = static_cast<double>(n);
        for (std::size_t p = 0; p < s1.size(); ++p) {
            const double var = std::max(0.0, s2[p] - s1[p] * s1[p]) * dn / (dn - 1.0);
            se[p] = std::sqrt(var / dn);
        }
        return se;
    }
};

void require(const ReferenceBatch& data, const PotentialModel& surrogate) {
    if (data.pi.empty()) throw EmptyDataset("gradient requested on an empty dataset");
    if (data.pi.states.dim != surrogate.dim()) throw DimMismatch("dataset dimension mismatch");
}

/// Per-state contribution J^T (beta/2)(b_theta - b) and h = (beta/4)||b - b_theta||^2.
struct DriftTerm {
    Vector jt_u;
    double h = 0.0;
};

class DriftTermEvaluator {
public:
    DriftTermEvaluator(const PotentialModel& model, double beta)
        : model_(model), beta_(beta), bt_(model.dim()), u_(model.dim()),
          term_{Vector(model.num_params()), 0.0} {}

    const DriftTerm& at(std::span<const double> x, std::span<const double> b_ref) {
        model_.drift(x, bt_);
        double q = 0.0;
        for (std::size_t i = 0; i < bt_.size(); ++i) {
            const double diff = bt_[i] - b_ref[i];
            q += diff * diff;
            u_[i] = 0.5 * beta_ * diff;
        }
        term_.h = 0.25 * beta_ * q;
        model_.jacobian_t_dot(x, u_, term_.jt_u);
        return term_;
    }

private:
    const PotentialModel& model_;
    double beta_;
    Vector bt_, u_;
    DriftTerm term_;
};

}  // namespace

Vector grad_second_moment(const ObservableBatch& paths, const PotentialModel& surrogate,
                          Vector* std_error) {
    if (paths.fingerprint != surrogate.fingerprint()) {
        throw StalePathError("paths were simulated under different parameters");
    }
    const std::size_t n = paths.size();
    const std::size_t d = surrogate.num_params();
    if (n == 0) throw EmptyDataset("no surrogate paths");
    if (paths.martingale.rows != n || paths.martingale.cols != d) {
        throw MissingNoise("path batch carries no martingale weights");
    }
    VectorMoments acc(d);
    Vector term(d);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p2 = paths.phi[i] * paths.phi[i];
        const auto m = paths.martingale.row(i);
        for (std::size_t p = 0; p < d; ++p) term[p] = p2 * m[p];
        acc.add(w, term);
    }
    if (std_error) *std_error = acc.std_error(n);
    return acc.s1;
}

Vector grad_second_moment(const ObservableSpec& spec, const PotentialModel& surrogate,
                          const std::vector<PathSample>& paths, double sigma) {
    if (paths.empty()) throw EmptyDataset("no surrogate paths");
    const std::size_t d = surrogate.num_params();
    const std::uint64_t fp = surrogate.fingerprint();
    Vector g(d, 0.0);
    for (const auto& path : paths) {
        if (path.fingerprint != fp) throw StalePathError("path simulated under different parameters");
        const double phi = evaluate_functional(spec, path);
        const Vector m = accumulate_martingale(path, surrogate, sigma);
        for (std::size_t p = 0; p < d; ++p) g[p] += phi * phi * m[p];
    }
    for (double& v : g) v /= static_cast<double>(paths.size());
    return g;
}

Vector grad_rer_forward(const ReferenceBatch& data, const PotentialModel& surrogate, double beta,
                        Vector* std_error) {
    require(data, surrogate);
    DriftTermEvaluator eval(surrogate, beta);
    VectorMoments acc(surrogate.num_params());
    for (std::size_t j = 0; j < data.size(); ++j) {
        acc.add(data.pi.weights[j], eval.at(data.pi.states[j], data.drift[j]).jt_u);
    }
    if (std_error) *std_error = acc.std_error(data.size());
    return acc.s1;
}

Vector grad_rer_reverse(const ReferenceBatch& data, const PotentialModel& surrogate, double beta,
                        Vector* std_error) {
    require(data, surrogate);
    const std::size_t n = data.size();
    const std::size_t d = surrogate.num_params();
    DriftTermEvaluator eval(surrogate, beta);

    // First pass: centring mean of grad_theta V and the per-state terms.
    Matrix gv(n, d);
    Vector h(n);
    Matrix jt(n, d);
    Vector mean_gv(d, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto x = data.pi.states[j];
        surrogate.grad_theta_value(x, gv.row(j));
        const DriftTerm& t = eval.at(x, data.drift[j]);
        h[j] = t.h;
        std::copy(t.jt_u.begin(), t.jt_u.end(), jt.row(j).begin());
        for (std::size_t p = 0; p < d; ++p) mean_gv[p] += data.pi.weights[j] * gv(j, p);
    }
    VectorMoments acc(d);
    Vector term(d);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t p = 0; p < d; ++p) {
            term[p] = -beta * h[j] * (gv(j, p) - mean_gv[p]) + jt(j, p);
        }
        acc.add(data.pi.weights[j], term);
    }
    if (std_error) *std_error = acc.std_error(n);
    return acc.s1;
}

Vector gibbs_score_gradient(const std::function<double(std::span<const double>)>& f,
                            const PotentialModel& model, const WeightedStates& pi, double beta,
                            Vector* std_error) {
    if (pi.empty()) throw EmptyDataset("score gradient on an empty batch");
    const std::size_t n = pi.size();
    const std::size_t d = model.num_params();
    Matrix gv(n, d);
    Vector fv(n);
    Vector mean_gv(d, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        model.grad_theta_value(pi.states[j], gv.row(j));
        fv[j] = f(pi.states[j]);
        for (std::size_t p = 0; p < d; ++p) mean_gv[p] += pi.weights[j] * gv(j, p);
    }
    VectorMoments acc(d);
    Vector term(d);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t p = 0; p < d; ++p) term[p] = -beta * fv[j] * (gv(j, p) - mean_gv[p]);
        acc.add(pi.weights[j], term);
    }
    if (std_error) *std_error = acc.std_error(n);
    return acc.s1;
}

GradientEstimate grad_go_loss(const LossSpec& spec, const ReferenceBatch& data,
                              const PotentialModel& surrogate, const ObservableBatch& paths,
                              double beta) {
    if (!is_goal_oriented(spec.kind)) throw ConfigError("grad_go_loss needs a GO loss kind");
    const LossValue v = go_loss_inexact(spec, data, surrogate, paths, beta);
    Vector se_m2, se_h;
    const Vector dm2 = grad_second_moment(paths, surrogate, &se_m2);
    const Vector dh = is_reverse(spec.kind) ? grad_rer_reverse(data, surrogate, beta, &se_h)
                                            : grad_rer_forward(data, surrogate, beta, &se_h);
    const std::size_t d = surrogate.num_params();
    // With the "auto" policy M_phi = c m2 moves with theta as well.
    const double m_factor = spec.m_phi ? 1.0 : 1.0 + spec.m_phi_safety;
    const double scale = v.m_phi + v.second_moment_term;
    GradientEstimate g;
    g.grad.resize(d);
    g.g1.resize(d);
    g.g2.resize(d);
    g.std_error.resize(d);
    for (std::size_t p = 0; p < d; ++p) {
        g.g1[p] = m_factor * v.rer_term * dm2[p];
        g.g2[p] = scale * dh[p];
        g.grad[p] = spec.horizon * (g.g1[p] + g.g2[p]);
        const double a = m_factor * v.rer_term * se_m2[p];
        const double b = scale * se_h[p];
        g.std_error[p] = spec.horizon * std::sqrt(a * a + b * b);
    }
    return g;
}

Vector grad_em_loss(const ReferenceBatch& data, const PotentialModel& surrogate) {
    require(data, surrogate);
    if (data.energy.size() != data.size()) throw EmptyDataset("dataset has no reference energies");
    const std::size_t d = surrogate.num_params();
    Vector g(d, 0.0), gv(d);
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto x = data.pi.states[j];
        const double r = surrogate.value(x) - data.energy[j];
        surrogate.grad_theta_value(x, gv);
        for (std::size_t p = 0; p < d; ++p) g[p] += data.pi.weights[j] * 2.0 * r * gv[p];
    }
    return g;
}

Vector grad_fm_loss(const ReferenceBatch& data, const PotentialModel& surrogate) {
    // fm = (4 / beta) H for any beta; use beta = 2 so the factor is 2.
    Vector g = grad_rer_forward(data, surrogate, 2.0);
    for (double& v : g) v *= 2.0;
    return g;
}

Vector grad_rer_loss(LossKind kind, const ReferenceBatch& data, const PotentialModel& surrogate,
                     double beta) {
    Vector g = kind == LossKind::RER_R ? grad_rer_reverse(data, surrogate, beta)
                                       : grad_rer_forward(data, surrogate, beta);
    for (double& v : g) v *= 4.0;
    return g;
}

std::string to_string(FdMode m) {
    return m == FdMode::Deterministic ? "deterministic" : "crn";
}

Vector fd_gradient(const std::function<double(const Vector&)>& loss, const Vector& theta,
                   double h) {
    if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
    Vector g(theta.size());
    Vector t = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        t[i] = theta[i] + h;
        const double up = loss(t);
        t[i] = theta[i] - h;
        const double dn = loss(t);
        t[i] = theta[i];
        g[i] = (up - dn) / (2.0 * h);
    }
    return g;
}

std::vector<GradCheckRow> fd_gradient_check(const std::function<double(const Vector&)>& loss,
                                            const Vector& theta, const Vector& analytic, double h,
                                            FdMode mode, double floor) {
    if (analytic.size() != theta.size()) throw DimMismatch("analytic gradient size mismatch");
    const Vector fd = fd_gradient(loss, theta, h);
    std::vector<GradCheckRow> rows(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        rows[i] = {i, analytic[i], fd[i],
                   std::abs(analytic[i] - fd[i]) / std::max(std::abs(fd[i]), floor), mode};
    }
    return rows;
}

}  // namespace golearn
