#include <cmath>
#include <random>

#include "golearn/potentials.hpp"
#include "golearn/rng.hpp"

namespace golearn {

std::size_t MlpConfig::num_params() const {
    std::size_t n = 0;
    std::size_t in = input_dim;
    for (std::size_t h : hidden) {
        n += h * in + h;
        in = h;
    }
    return n + in + 1;
}

// Per-evaluation scratch. a[0] is the input; a[l] for l >= 1 the tanh outputs.
struct MlpPotential::Tape {
    std::vector<Vector> a;
    std::vector<Vector> s;      // 1 - a^2
    std::vector<Vector> a_dot;  // tangent of a along v
    std::vector<Vector> z_dot;
    Vector adj_a, adj_a_dot, adj_z, adj_z_dot, next_a, next_a_dot;

    void reserve(std::size_t depth) {
        a.resize(depth);
        s.resize(depth);
        a_dot.resize(depth);
        z_dot.resize(depth);
    }
};

MlpPotential::MlpPotential(MlpConfig config) : config_(std::move(config)) {
    build_layers();
    theta_.assign(config_.num_params(), 0.0);
    NormalSource normal({config_.init_seed, 0x6d6c70ULL});
    for (const Layer& l : layers_) {
        const double sd = config_.init_scale / std::sqrt(static_cast<double>(l.in));
        for (std::size_t i = 0; i < l.in * l.out; ++i) theta_[l.w_offset + i] = sd * normal();
    }
}

MlpPotential::MlpPotential(MlpConfig config, Vector theta)
    : config_(std::move(config)), theta_(std::move(theta)) {
    build_layers();
    if (theta_.size() != config_.num_params()) {
        throw DimMismatch("mlp: expected " + std::to_string(config_.num_params()) +
                          " parameters, got " + std::to_string(theta_.size()));
    }
}

void MlpPotential::build_layers() {
    if (config_.input_dim == 0) throw ConfigError("mlp: input_dim must be positive");
    if (config_.center.size() != config_.input_dim) throw ConfigError("mlp: center has wrong dim");
    layers_.clear();
    std::size_t in = config_.input_dim;
    std::size_t offset = 0;
    auto add = [&](std::size_t out) {
        Layer l{in, out, offset, offset + in * out};
        offset += in * out + out;
        layers_.push_back(l);
        in = out;
    };
    for (std::size_t h : config_.hidden) {
        if (h == 0) throw ConfigError("mlp: hidden width must be positive");
        add(h);
    }
    add(1);
}

void MlpPotential::forward(std::span<const double> x, Tape& tape) const {
    const std::size_t depth = layers_.size();  // hidden layers = depth - 1
    tape.reserve(depth);
    tape.a[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l + 1 < depth; ++l) {
        const Layer& L = layers_[l];
        const Vector& in = tape.a[l];
        Vector& out = tape.a[l + 1];
        Vector& s = tape.s[l + 1];
        out.resize(L.out);
        s.resize(L.out);
        for (std::size_t o = 0; o < L.out; ++o) {
            const double* w = theta_.data() + L.w_offset + o * L.in;
            double z = theta_[L.b_offset + o];
            for (std::size_t i = 0; i < L.in; ++i) z += w[i] * in[i];
            const double t = std::tanh(z);
            out[o] = t;
            s[o] = 1.0 - t * t;
        }
    }
}

double MlpPotential::quartic_value(std::span<const double> x) const {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = x[i] - config_.center[i];
        r2 += r * r;
    }
    return config_.quartic * r2 * r2;
}

void MlpPotential::quartic_grad(std::span<const double> x, std::span<double> out) const {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = x[i] - config_.center[i];
        r2 += r * r;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = 4.0 * config_.quartic * r2 * (x[i] - config_.center[i]);
    }
}

double MlpPotential::value(std::span<const double> x) const {
    thread_local Tape tape;
    forward(x, tape);
    const Layer& top = layers_.back();
    const Vector& h = tape.a[layers_.size() - 1];
    double y = theta_[top.b_offset];
    for (std::size_t i = 0; i < top.in; ++i) y += theta_[top.w_offset + i] * h[i];
    return y + quartic_value(x);
}

void MlpPotential::drift(std::span<const double> x, std::span<double> out) const {
    thread_local Tape tape;
    forward(x, tape);
    const std::size_t depth = layers_.size();
    const Layer& top = layers_.back();
    tape.adj_a.assign(theta_.begin() + top.w_offset, theta_.begin() + top.w_offset + top.in);
    for (std::size_t l = depth - 1; l-- > 0;) {
        const Layer& L = layers_[l];
        const Vector& s = tape.s[l + 1];
        tape.next_a.assign(L.in, 0.0);
        for (std::size_t o = 0; o < L.out; ++o) {
            const double dz = tape.adj_a[o] * s[o];
            const double* w = theta_.data() + L.w_offset + o * L.in;
            for (std::size_t i = 0; i < L.in; ++i) tape.next_a[i] += w[i] * dz;
        }
        std::swap(tape.adj_a, tape.next_a);
    }
    quartic_grad(x, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -(out[i] + tape.adj_a[i]);
}

void MlpPotential::grad_theta_value(std::span<const double> x, std::span<double> out) const {
    thread_local Tape tape;
    forward(x, tape);
    const std::size_t depth = layers_.size();
    const Layer& top = layers_.back();
    const Vector& h_top = tape.a[depth - 1];
    for (std::size_t i = 0; i < top.in; ++i) out[top.w_offset + i] = h_top[i];
    out[top.b_offset] = 1.0;
    tape.adj_a.assign(theta_.begin() + top.w_offset, theta_.begin() + top.w_offset + top.in);
    for (std::size_t l = depth - 1; l-- > 0;) {
        const Layer& L = layers_[l];
        const Vector& s = tape.s[l + 1];
        const Vector& in = tape.a[l];
        tape.next_a.assign(L.in, 0.0);
        for (std::size_t o = 0; o < L.out; ++o) {
            const double dz = tape.adj_a[o] * s[o];
            const double* w = theta_.data() + L.w_offset + o * L.in;
            double* gw = out.data() + L.w_offset + o * L.in;
            for (std::size_t i = 0; i < L.in; ++i) {
                gw[i] = dz * in[i];
                tape.next_a[i] += w[i] * dz;
            }
            out[L.b_offset + o] = dz;
        }
        std::swap(tape.adj_a, tape.next_a);
    }
}

void MlpPotential::mixed_vjp(Tape& tape, std::span<const double> v,
                             std::span<double> out) const {
    // Forward tangent: a_dot[0] = v, z_dot[l] = W_l a_dot[l-1], a_dot[l] = s_l * z_dot[l].
    // The output tangent is grad_x N . v; differentiate it w.r.t. theta by a reverse
    // sweep carrying adjoints of both the primal activations and their tangents.
    const std::size_t depth = layers_.size();
    tape.a_dot[0].assign(v.begin(), v.end());
    for (std::size_t l = 0; l + 1 < depth; ++l) {
        const Layer& L = layers_[l];
        Vector& zd = tape.z_dot[l + 1];
        Vector& ad = tape.a_dot[l + 1];
        zd.resize(L.out);
        ad.resize(L.out);
        for (std::size_t o = 0; o < L.out; ++o) {
            const double* w = theta_.data() + L.w_offset + o * L.in;
            double z = 0.0;
            for (std::size_t i = 0; i < L.in; ++i) z += w[i] * tape.a_dot[l][i];
            zd[o] = z;
            ad[o] = tape.s[l + 1][o] * z;
        }
    }
    std::fill(out.begin(), out.end(), 0.0);
    const Layer& top = layers_.back();
    const Vector& ad_top = tape.a_dot[depth - 1];
    for (std::size_t i = 0; i < top.in; ++i) out[top.w_offset + i] = ad_top[i];
    tape.adj_a_dot.assign(theta_.begin() + top.w_offset, theta_.begin() + top.w_offset + top.in);
    tape.adj_a.assign(top.in, 0.0);

    for (std::size_t l = depth - 1; l-- > 0;) {
        const Layer& L = layers_[l];
        const Vector& s = tape.s[l + 1];
        const Vector& a = tape.a[l + 1];
        const Vector& zd = tape.z_dot[l + 1];
        const Vector& in = tape.a[l];
        const Vector& in_dot = tape.a_dot[l];
        tape.next_a.assign(L.in, 0.0);
        tape.next_a_dot.assign(L.in, 0.0);
        for (std::size_t o = 0; o < L.out; ++o) {
            const double g_zdot = tape.adj_a_dot[o] * s[o];
            const double g_z =
                tape.adj_a[o] * s[o] - 2.0 * tape.adj_a_dot[o] * zd[o] * a[o] * s[o];
            const double* w = theta_.data() + L.w_offset + o * L.in;
            double* gw = out.data() + L.w_offset + o * L.in;
            for (std::size_t i = 0; i < L.in; ++i) {
                gw[i] += g_zdot * in_dot[i] + g_z * in[i];
                tape.next_a_dot[i] += w[i] * g_zdot;
                tape.next_a[i] += w[i] * g_z;
            }
            out[L.b_offset + o] += g_z;
        }
        std::swap(tape.adj_a, tape.next_a);
        std::swap(tape.adj_a_dot, tape.next_a_dot);
    }
}

void MlpPotential::jacobian_t_dot(std::span<const double> x, std::span<const double> v,
                                  std::span<double> out) const {
    thread_local Tape tape;
    forward(x, tape);
    mixed_vjp(tape, v, out);
    for (double& g : out) g = -g;
}

void MlpPotential::jacobian(std::span<const double> x, Matrix& out) const {
    thread_local Tape tape;
    forward(x, tape);
    Vector e(dim(), 0.0);
    for (std::size_t k = 0; k < dim(); ++k) {
        std::fill(e.begin(), e.end(), 0.0);
        e[k] = 1.0;
        auto row = out.row(k);
        mixed_vjp(tape, e, row);
        for (double& g : row) g = -g;
    }
}

PotentialPtr MlpPotential::with_params(const Vector& theta) const {
    return std::make_shared<MlpPotential>(config_, theta);
}

nlohmann::json MlpPotential::config() const {
    return {{"kind", kind()},           {"input_dim", config_.input_dim},
            {"hidden", config_.hidden}, {"quartic", config_.quartic},
            {"center", config_.center}, {"init_seed", config_.init_seed},
            {"init_scale", config_.init_scale}, {"theta", theta_}};
}

}  // namespace golearn
