#include "golearn/potentials.hpp"

#include <array>
#include <cmath>
#include <cstring>

namespace golearn {

void PotentialModel::check_dim(std::span<const double> x) const {
    if (x.size() != dim()) {
        throw DimMismatch(kind() + ": expected state of dim " + std::to_string(dim()) + ", got " +
                          std::to_string(x.size()));
    }
}

void PotentialModel::jacobian_t_dot(std::span<const double> x, std::span<const double> v,
                                    std::span<double> out) const {
    Matrix j(dim(), num_params());
    jacobian(x, j);
    for (std::size_t p = 0; p < num_params(); ++p) {
        double s = 0.0;
        for (std::size_t r = 0; r < dim(); ++r) s += j(r, p) * v[r];
        out[p] = s;
    }
}

Vector PotentialModel::drift(std::span<const double> x) const {
    check_dim(x);
    Vector out(dim());
    drift(x, out);
    return out;
}

Vector PotentialModel::grad_theta_value(std::span<const double> x) const {
    check_dim(x);
    Vector out(num_params());
    grad_theta_value(x, out);
    return out;
}

Matrix PotentialModel::jacobian(std::span<const double> x) const {
    check_dim(x);
    Matrix out(dim(), num_params());
    jacobian(x, out);
    return out;
}

std::uint64_t PotentialModel::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : params()) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Double well

DoubleWellPotential::DoubleWellPotential(double theta) : theta_{theta} {}

double DoubleWellPotential::value(std::span<const double> x) const {
    const double y = x[0];
    const double y2 = y * y;
    return y2 * y2 - 2.0 * y2 + theta_[0] * (y2 * y / 3.0 + y2 + y);
}

void DoubleWellPotential::drift(std::span<const double> x, std::span<double> out) const {
    const double y = x[0];
    out[0] = -(4.0 * y * y * y - 4.0 * y + theta_[0] * (y + 1.0) * (y + 1.0));
}

void DoubleWellPotential::grad_theta_value(std::span<const double> x, std::span<double> out) const {
    const double y = x[0];
    out[0] = y * y * y / 3.0 + y * y + y;
}

void DoubleWellPotential::jacobian(std::span<const double> x, Matrix& out) const {
    const double y = x[0];
    out(0, 0) = -(y + 1.0) * (y + 1.0);
}

void DoubleWellPotential::jacobian_t_dot(std::span<const double> x, std::span<const double> v,
                                         std::span<double> out) const {
    const double y = x[0];
    out[0] = -(y + 1.0) * (y + 1.0) * v[0];
}

PotentialPtr DoubleWellPotential::with_params(const Vector& theta) const {
    if (theta.size() != 1) throw DimMismatch("double_well takes one parameter");
    return std::make_shared<DoubleWellPotential>(theta[0]);
}

nlohmann::json DoubleWellPotential::config() const {
    return {{"kind", kind()}, {"theta", theta_}};
}

// ---------------------------------------------------------------------------
// Quadratic

QuadraticPotential::QuadraticPotential(double stiffness, double center)
    : theta_{stiffness}, center_(center) {}

double QuadraticPotential::value(std::span<const double> x) const {
    const double r = x[0] - center_;
    return 0.5 * theta_[0] * r * r;
}

void QuadraticPotential::drift(std::span<const double> x, std::span<double> out) const {
    out[0] = -theta_[0] * (x[0] - center_);
}

void QuadraticPotential::grad_theta_value(std::span<const double> x, std::span<double> out) const {
    const double r = x[0] - center_;
    out[0] = 0.5 * r * r;
}

void QuadraticPotential::jacobian(std::span<const double> x, Matrix& out) const {
    out(0, 0) = -(x[0] - center_);
}

PotentialPtr QuadraticPotential::with_params(const Vector& theta) const {
    if (theta.size() != 1) throw DimMismatch("quadratic takes one parameter");
    return std::make_shared<QuadraticPotential>(theta[0], center_);
}

nlohmann::json QuadraticPotential::config() const {
    return {{"kind", kind()}, {"theta", theta_}, {"center", center_}};
}

// ---------------------------------------------------------------------------
// Gaussian mixture

GaussianMixturePotential::GaussianMixturePotential(Vector theta, double quartic)
    : theta_(std::move(theta)), quartic_(quartic) {
    if (theta_.size() != 6) throw DimMismatch("gaussian_mixture takes six parameters");
    for (int i = 0; i < 2; ++i) inv_var_[i] = std::exp(-2.0 * theta_[4 + i]);
}

namespace {

struct GmmTerm {
    double w, r, inv_var, g;  // weight, x - c, 1/nu^2, exp(-r^2/(2 nu^2))
};

std::array<GmmTerm, 2> gmm_terms(const Vector& th, const std::array<double, 2>& inv_var, double x) {
    std::array<GmmTerm, 2> t{};
    for (int i = 0; i < 2; ++i) {
        const double r = x - th[2 + i];
        t[i] = {th[i], r, inv_var[i], std::exp(-0.5 * r * r * inv_var[i])};
    }
    return t;
}

}  // namespace

double GaussianMixturePotential::value(std::span<const double> x) const {
    const auto t = gmm_terms(theta_, inv_var_, x[0]);
    const double d = x[0] - 0.5 * (theta_[2] + theta_[3]);
    const double d2 = d * d;
    return t[0].w * t[0].g + t[1].w * t[1].g + quartic_ * d2 * d2;
}

void GaussianMixturePotential::drift(std::span<const double> x, std::span<double> out) const {
    const auto t = gmm_terms(theta_, inv_var_, x[0]);
    const double d = x[0] - 0.5 * (theta_[2] + theta_[3]);
    double dv = 4.0 * quartic_ * d * d * d;
    for (const auto& c : t) dv -= c.w * c.g * c.r * c.inv_var;
    out[0] = -dv;
}

void GaussianMixturePotential::grad_theta_value(std::span<const double> x,
                                                std::span<double> out) const {
    const auto t = gmm_terms(theta_, inv_var_, x[0]);
    const double d = x[0] - 0.5 * (theta_[2] + theta_[3]);
    for (int i = 0; i < 2; ++i) {
        const auto& c = t[i];
        out[i] = c.g;
        out[2 + i] = c.w * c.g * c.r * c.inv_var - 2.0 * quartic_ * d * d * d;
        out[4 + i] = c.w * c.g * c.r * c.r * c.inv_var;
    }
}

void GaussianMixturePotential::jacobian_row(double x, std::span<double> row) const {
    const auto t = gmm_terms(theta_, inv_var_, x);
    const double d = x - 0.5 * (theta_[2] + theta_[3]);
    // Entries are d/dtheta of dV/dx, negated at the end.
    for (int i = 0; i < 2; ++i) {
        const auto& c = t[i];
        const double q = c.r * c.r * c.inv_var;
        const double dw = -c.g * c.r * c.inv_var;
        const double dc = c.w * c.g * c.inv_var * (1.0 - q) - 6.0 * quartic_ * d * d;
        const double ds = -c.w * c.g * c.r * c.inv_var * (q - 2.0);
        row[i] = -dw;
        row[2 + i] = -dc;
        row[4 + i] = -ds;
    }
}

void GaussianMixturePotential::jacobian(std::span<const double> x, Matrix& out) const {
    jacobian_row(x[0], out.row(0));
}

void GaussianMixturePotential::jacobian_t_dot(std::span<const double> x,
                                              std::span<const double> v,
                                              std::span<double> out) const {
    jacobian_row(x[0], out);
    for (double& o : out) o *= v[0];
}

PotentialPtr GaussianMixturePotential::with_params(const Vector& theta) const {
    return std::make_shared<GaussianMixturePotential>(theta, quartic_);
}

nlohmann::json GaussianMixturePotential::config() const {
    return {{"kind", kind()}, {"theta", theta_}, {"quartic", quartic_}};
}

// ---------------------------------------------------------------------------
// Muller-Brown

namespace {

constexpr std::array<double, 4> kMbA{-200.0, -100.0, -170.0, 15.0};
constexpr std::array<double, 4> kMba{-1.0, -1.0, -6.5, 0.7};
constexpr std::array<double, 4> kMbb{0.0, 0.0, 11.0, 0.6};
constexpr std::array<double, 4> kMbc{-10.0, -10.0, -6.5, 0.7};
constexpr std::array<double, 4> kMbx{1.0, 0.0, -0.5, -1.0};
constexpr std::array<double, 4> kMby{0.0, 0.5, 1.5, 1.0};

}  // namespace

MullerBrownPotential::MullerBrownPotential(double scale, double shift)
    : scale_(scale), shift_(shift) {}

double MullerBrownPotential::value(std::span<const double> x) const {
    double v = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const double dx = x[0] - kMbx[k];
        const double dy = x[1] - kMby[k];
        v += kMbA[k] * std::exp(kMba[k] * dx * dx + kMbb[k] * dx * dy + kMbc[k] * dy * dy);
    }
    return scale_ * v + shift_;
}

void MullerBrownPotential::drift(std::span<const double> x, std::span<double> out) const {
    double gx = 0.0;
    double gy = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const double dx = x[0] - kMbx[k];
        const double dy = x[1] - kMby[k];
        const double e =
            kMbA[k] * std::exp(kMba[k] * dx * dx + kMbb[k] * dx * dy + kMbc[k] * dy * dy);
        gx += e * (2.0 * kMba[k] * dx + kMbb[k] * dy);
        gy += e * (kMbb[k] * dx + 2.0 * kMbc[k] * dy);
    }
    out[0] = -scale_ * gx;
    out[1] = -scale_ * gy;
}

void MullerBrownPotential::grad_theta_value(std::span<const double>, std::span<double>) const {}

void MullerBrownPotential::jacobian(std::span<const double>, Matrix&) const {}

PotentialPtr MullerBrownPotential::with_params(const Vector& theta) const {
    if (!theta.empty()) throw DimMismatch("muller_brown has no trainable parameters");
    return std::make_shared<MullerBrownPotential>(scale_, shift_);
}

nlohmann::json MullerBrownPotential::config() const {
    return {{"kind", kind()}, {"scale", scale_}, {"shift", shift_}};
}

// ---------------------------------------------------------------------------

PotentialPtr potential_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    auto theta_of = [&](std::size_t n) {
        Vector th = j.at("theta").get<Vector>();
        if (th.size() != n) throw ConfigError(kind + ": wrong parameter count");
        return th;
    };
    if (kind == "double_well") return std::make_shared<DoubleWellPotential>(theta_of(1)[0]);
    if (kind == "quadratic")
        return std::make_shared<QuadraticPotential>(theta_of(1)[0], j.value("center", 0.0));
    if (kind == "gaussian_mixture")
        return std::make_shared<GaussianMixturePotential>(theta_of(6), j.value("quartic", 0.2));
    if (kind == "muller_brown")
        return std::make_shared<MullerBrownPotential>(j.value("scale", 1.0), j.value("shift", 0.0));
    if (kind == "mlp") {
        MlpConfig cfg;
        cfg.input_dim = j.value("input_dim", cfg.input_dim);
        cfg.hidden = j.value("hidden", cfg.hidden);
        cfg.quartic = j.value("quartic", cfg.quartic);
        cfg.center = j.value("center", cfg.center);
        cfg.init_seed = j.value("init_seed", cfg.init_seed);
        cfg.init_scale = j.value("init_scale", cfg.init_scale);
        if (j.contains("theta")) return std::make_shared<MlpPotential>(cfg, j.at("theta").get<Vector>());
        return std::make_shared<MlpPotential>(cfg);
    }
    throw ConfigError("unknown potential kind: " + kind);
}

}  // namespace golearn
