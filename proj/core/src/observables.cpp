#include "golearn/observables.hpp"

#include <cmath>
#include <sstream>

namespace golearn {

Region Region::interval(double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("interval requires lower < upper");
    Region r;
    r.shape = Shape::Interval;
    r.lower = lo;
    r.upper = hi;
    return r;
}

Region Region::ellipse(Vector center, Vector semi_axes) {
    if (center.size() != semi_axes.size() || center.empty()) {
        throw ConfigError("ellipse center and semi-axes must have the same positive dimension");
    }
    for (double a : semi_axes) {
        if (!(a > 0.0)) throw ConfigError("ellipse semi-axes must be positive");
    }
    Region r;
    r.shape = Shape::Ellipse;
    r.center = std::move(center);
    r.semi_axes = std::move(semi_axes);
    return r;
}

bool Region::contains(std::span<const double> x) const {
    if (shape == Shape::Interval) return x[0] >= lower && x[0] <= upper;
    double s = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) {
        const double u = (x[i] - center[i]) / semi_axes[i];
        s += u * u;
    }
    return s <= 1.0;
}

std::string Region::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (shape == Shape::Interval) {
        os << "interval[" << lower << "," << upper << "]";
    } else {
        os << "ellipse[";
        for (std::size_t i = 0; i < center.size(); ++i) os << center[i] << ":" << semi_axes[i] << ";";
        os << "]";
    }
    return os.str();
}

StopRule ObservableSpec::stop_rule() const {
    switch (kind) {
        case ObservableKind::FirstExit:
            return [r = region](std::span<const double> x) { return !r.contains(x); };
        case ObservableKind::FirstHit:
            return [r = region](std::span<const double> x) { return r.contains(x); };
        case ObservableKind::TimeIntegral:
            return {};
    }
    return {};
}

std::string ObservableSpec::tag() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case ObservableKind::FirstExit: os << "exit:"; break;
        case ObservableKind::FirstHit: os << "hit:"; break;
        case ObservableKind::TimeIntegral: os << "integral:"; break;
    }
    os << region.describe() << ":T=" << t_cap;
    return os.str();
}

void ObservableSpec::validate() const {
    if (!(t_cap > 0.0)) throw ConfigError("observable cap must be positive");
}

double evaluate_functional(const ObservableSpec& spec, const PathSample& path) {
    if (path.stop_tag != spec.tag()) {
        throw SpecMismatch("path stopping rule '" + path.stop_tag + "' does not match observable '" +
                           spec.tag() + "'");
    }
    if (!spec.integrand) return path.dt * static_cast<double>(path.stop_index);
    double s = 0.0;
    for (std::size_t k = 0; k < path.stop_index; ++k) s += spec.integrand(path.state(k));
    return s * path.dt;
}

MomentEstimate moments_from_values(std::span<const double> values, std::size_t n_capped) {
    MomentEstimate m;
    m.n_paths = values.size();
    if (values.empty()) return m;
    const double n = static_cast<double>(values.size());
    double s1 = 0.0;
    double s2 = 0.0;
    for (double v : values) {
        s1 += v;
        s2 += v * v;
    }
    m.mean = s1 / n;
    m.second_moment = s2 / n;
    m.variance = m.second_moment - m.mean * m.mean;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - m.mean) * (v - m.mean);
        m.std_error_mean = std::sqrt(ss / (n - 1.0) / n);
    }
    m.capped_fraction = static_cast<double>(n_capped) / n;
    return m;
}

MomentEstimate estimate_moments(const ObservableSpec& spec, const SdeSystem& system,
                                std::size_t n_paths, double dt, std::uint64_t seed) {
    if (n_paths < 2) throw ConfigError("estimate_moments needs at least two paths");
    spec.validate();
    system.validate();
    const StopRule stop = spec.stop_rule();
    const std::size_t max_steps = cap_steps(spec.t_cap, dt);
    Vector values(n_paths);
    std::size_t capped = 0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        NormalSource src(RngStream::for_index(seed, i));
        NoiseFn noise = [&](std::span<double> xi) { src.fill(xi); };
        double integral = 0.0;
        PathOutcome out;
        try {
            out = run_path(system, stop, max_steps, dt, noise,
                           [&](std::size_t, std::span<const double> x, std::span<const double>) {
                               if (spec.integrand) integral += spec.integrand(x);
                           });
        } catch (const NonFiniteDrift&) {
            throw NonFiniteDrift(i, "path");
        }
        values[i] = spec.integrand ? integral * dt : dt * static_cast<double>(out.stop_index);
        if (out.capped) ++capped;
    }
    return moments_from_values(values, capped);
}

Vector accumulate_martingale(const PathSample& path, const JacobianFn& jacobian,
                             std::size_t num_params, double sigma) {
    if (!path.has_noise || path.noise.size() < path.stop_index * path.dim) {
        throw MissingNoise("path does not retain its Brownian increments");
    }
    Vector m(num_params, 0.0);
    Matrix j(path.dim, num_params);
    const double scale = std::sqrt(path.dt) / sigma;
    for (std::size_t k = 0; k < path.stop_index; ++k) {
        jacobian(path.state(k), j);
        const auto xi = path.increment(k);
        for (std::size_t r = 0; r < path.dim; ++r) {
            const double w = scale * xi[r];
            for (std::size_t p = 0; p < num_params; ++p) m[p] += j(r, p) * w;
        }
    }
    return m;
}

Vector accumulate_martingale(const PathSample& path, const PotentialModel& model, double sigma) {
    if (!path.has_noise || path.noise.size() < path.stop_index * path.dim) {
        throw MissingNoise("path does not retain its Brownian increments");
    }
    const std::size_t d = model.num_params();
    Vector m(d, 0.0), g(d);
    const double scale = std::sqrt(path.dt) / sigma;
    for (std::size_t k = 0; k < path.stop_index; ++k) {
        model.jacobian_t_dot(path.state(k), path.increment(k), g);
        for (std::size_t p = 0; p < d; ++p) m[p] += scale * g[p];
    }
    return m;
}

ObservableBatch sample_observable_batch(const ObservableSpec& spec, const PotentialModel& model,
                                        double beta, const Vector& x0, std::size_t n_paths,
                                        double dt, std::uint64_t seed, bool with_martingale) {
    spec.validate();
    SdeSystem system;
    system.dim = model.dim();
    system.beta = beta;
    system.x0 = x0;
    system.drift = [&model](std::span<const double> x, std::span<double> out) {
        model.drift(x, out);
    };
    system.validate();

    const std::size_t d = model.num_params();
    const StopRule stop = spec.stop_rule();
    const std::size_t max_steps = cap_steps(spec.t_cap, dt);
    const double scale = std::sqrt(dt) / system.sigma();

    ObservableBatch batch;
    batch.phi.resize(n_paths);
    batch.fingerprint = model.fingerprint();
    batch.dt = dt;
    if (with_martingale) batch.martingale = Matrix(n_paths, d);
    Vector g(d);
    for (std::size_t i = 0; i < n_paths; ++i) {
        NormalSource src(RngStream::for_index(seed, i));
        NoiseFn noise = [&](std::span<double> xi) { src.fill(xi); };
        double integral = 0.0;
        auto mrow = with_martingale ? batch.martingale.row(i) : std::span<double>{};
        PathOutcome out;
        try {
            out = run_path(system, stop, max_steps, dt, noise,
                           [&](std::size_t, std::span<const double> x, std::span<const double> xi) {
                               if (spec.integrand) integral += spec.integrand(x);
                               if (with_martingale) {
                                   model.jacobian_t_dot(x, xi, g);
                                   for (std::size_t p = 0; p < d; ++p) mrow[p] += scale * g[p];
                               }
                           });
        } catch (const NonFiniteDrift&) {
            throw NonFiniteDrift(i, "path");
        }
        batch.phi[i] = spec.integrand ? integral * dt : dt * static_cast<double>(out.stop_index);
        if (out.capped) ++batch.n_capped;
    }
    return batch;
}

nlohmann::json to_json(const MomentEstimate& m) {
    return {{"mean", m.mean},
            {"second_moment", m.second_moment},
            {"variance", m.variance},
            {"std_error_mean", m.std_error_mean},
            {"n_paths", m.n_paths},
            {"capped_fraction", m.capped_fraction}};
}

}  // namespace golearn
