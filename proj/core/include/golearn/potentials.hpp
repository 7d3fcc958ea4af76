#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "golearn/types.hpp"

namespace golearn {

/// Parametric potential V_theta on R^m. The induced Langevin drift is
/// -grad_x V_theta and the parameter Jacobian of that drift is
/// J_theta(x) = d(drift)/d(theta) = -d_theta grad_x V_theta (m x d).
///
/// Models are immutable; a parameter update produces a new model through
/// with_params().
class PotentialModel {
public:
    virtual ~PotentialModel() = default;

    virtual std::string kind() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::size_t num_params() const = 0;
    virtual const Vector& params() const = 0;

    virtual double value(std::span<const double> x) const = 0;
    virtual void drift(std::span<const double> x, std::span<double> out) const = 0;
    virtual void grad_theta_value(std::span<const double> x, std::span<double> out) const = 0;
    virtual void jacobian(std::span<const double> x, Matrix& out) const = 0;

    /// out = J_theta(x)^T v. The default forms the full Jacobian.
    virtual void jacobian_t_dot(std::span<const double> x, std::span<const double> v,
                                std::span<double> out) const;

    virtual std::shared_ptr<const PotentialModel> with_params(const Vector& theta) const = 0;
    virtual nlohmann::json config() const = 0;

    // Allocating conveniences; they validate dimensions.
    Vector drift(std::span<const double> x) const;
    Vector grad_theta_value(std::span<const double> x) const;
    Matrix jacobian(std::span<const double> x) const;

    /// FNV-1a hash of the parameter vector; tags paths with the theta they were drawn under.
    std::uint64_t fingerprint() const;

protected:
    void check_dim(std::span<const double> x) const;
};

using PotentialPtr = std::shared_ptr<const PotentialModel>;

/// V_theta(x) = x^4 - 2x^2 + theta (x^3/3 + x^2 + x). One parameter.
class DoubleWellPotential final : public PotentialModel {
public:
    explicit DoubleWellPotential(double theta);

    std::string kind() const override { return "double_well"; }
    std::size_t dim() const override { return 1; }
    std::size_t num_params() const override { return 1; }
    const Vector& params() const override { return theta_; }

    double value(std::span<const double> x) const override;
    void drift(std::span<const double> x, std::span<double> out) const override;
    void grad_theta_value(std::span<const double> x, std::span<double> out) const override;
    void jacobian(std::span<const double> x, Matrix& out) const override;
    void jacobian_t_dot(std::span<const double> x, std::span<const double> v,
                        std::span<double> out) const override;
    PotentialPtr with_params(const Vector& theta) const override;
    nlohmann::json config() const override;

    using PotentialModel::drift;
    using PotentialModel::grad_theta_value;
    using PotentialModel::jacobian;

private:
    Vector theta_;
};

/// V_theta(x) = theta (x - center)^2 / 2, theta > 0. Gibbs law is N(center, 1/(beta theta)).
class QuadraticPotential final : public PotentialModel {
public:
    explicit QuadraticPotential(double stiffness, double center = 0.0);

    std::string kind() const override { return "quadratic"; }
    std::size_t dim() const override { return 1; }
    std::size_t num_params() const override { return 1; }
    const Vector& params() const override { return theta_; }

    double value(std::span<const double> x) const override;
    void drift(std::span<const double> x, std::span<double> out) const override;
    void grad_theta_value(std::span<const double> x, std::span<double> out) const override;
    void jacobian(std::span<const double> x, Matrix& out) const override;
    PotentialPtr with_params(const Vector& theta) const override;
    nlohmann::json config() const override;

    using PotentialModel::drift;
    using PotentialModel::grad_theta_value;
    using PotentialModel::jacobian;

private:
    Vector theta_;
    double center_;
};

/// Confined two-component Gaussian mixture on R:
///   V(x) = sum_i w_i exp(-(x - c_i)^2 / (2 nu_i^2)) + A (x - cbar)^4,
/// theta = (w1, w2, c1, c2, log nu1, log nu2), cbar = (c1 + c2) / 2.
class GaussianMixturePotential final : public PotentialModel {
public:
    explicit GaussianMixturePotential(Vector theta, double quartic = 0.2);

    std::string kind() const override { return "gaussian_mixture"; }
    std::size_t dim() const override { return 1; }
    std::size_t num_params() const override { return 6; }
    const Vector& params() const override { return theta_; }
    double quartic() const { return quartic_; }

    double value(std::span<const double> x) const override;
    void drift(std::span<const double> x, std::span<double> out) const override;
    void grad_theta_value(std::span<const double> x, std::span<double> out) const override;
    void jacobian(std::span<const double> x, Matrix& out) const override;
    void jacobian_t_dot(std::span<const double> x, std::span<const double> v,
                        std::span<double> out) const override;
    PotentialPtr with_params(const Vector& theta) const override;
    nlohmann::json config() const override;

    using PotentialModel::drift;
    using PotentialModel::grad_theta_value;
    using PotentialModel::jacobian;

private:
    void jacobian_row(double x, std::span<double> row) const;

    Vector theta_;
    double quartic_;
    std::array<double, 2> inv_var_{};  // 1 / nu_i^2
};

/// Four-term Muller-Brown surface on R^2, scaled: V = scale * MB(x, y) + shift.
/// Fixed constants, no trainable parameters.
class MullerBrownPotential final : public PotentialModel {
public:
    explicit MullerBrownPotential(double scale = 1.0, double shift = 0.0);

    std::string kind() const override { return "muller_brown"; }
    std::size_t dim() const override { return 2; }
    std::size_t num_params() const override { return 0; }
    const Vector& params() const override { return theta_; }
    double scale() const { return scale_; }

    double value(std::span<const double> x) const override;
    void drift(std::span<const double> x, std::span<double> out) const override;
    void grad_theta_value(std::span<const double> x, std::span<double> out) const override;
    void jacobian(std::span<const double> x, Matrix& out) const override;
    PotentialPtr with_params(const Vector& theta) const override;
    nlohmann::json config() const override;

    using PotentialModel::drift;
    using PotentialModel::grad_theta_value;
    using PotentialModel::jacobian;

private:
    Vector theta_;
    double scale_;
    double shift_;
};

/// Architecture of a tanh multilayer perceptron potential with a fixed
/// confining quartic term  A ||x - center||^4.
struct MlpConfig {
    std::size_t input_dim = 2;
    std::vector<std::size_t> hidden = {20};
    double quartic = 0.2;
    Vector center = {0.0, 0.0};
    std::uint64_t init_seed = 1;
    double init_scale = 1.0;

    /// Number of weights and biases of the network.
    std::size_t num_params() const;
};

/// V_theta(x) = N_theta(x) + A ||x - x_c||^4 with N a tanh MLP (scalar output).
/// Parameters are laid out layer by layer as (W_l row-major, b_l).
class MlpPotential final : public PotentialModel {
public:
    /// Randomly initialized from config.init_seed.
    explicit MlpPotential(MlpConfig config);
    MlpPotential(MlpConfig config, Vector theta);

    std::string kind() const override { return "mlp"; }
    std::size_t dim() const override { return config_.input_dim; }
    std::size_t num_params() const override { return theta_.size(); }
    const Vector& params() const override { return theta_; }
    const MlpConfig& architecture() const { return config_; }

    double value(std::span<const double> x) const override;
    void drift(std::span<const double> x, std::span<double> out) const override;
    void grad_theta_value(std::span<const double> x, std::span<double> out) const override;
    void jacobian(std::span<const double> x, Matrix& out) const override;
    void jacobian_t_dot(std::span<const double> x, std::span<const double> v,
                        std::span<double> out) const override;
    PotentialPtr with_params(const Vector& theta) const override;
    nlohmann::json config() const override;

    using PotentialModel::drift;
    using PotentialModel::grad_theta_value;
    using PotentialModel::jacobian;

private:
    struct Layer {
        std::size_t in = 0;
        std::size_t out = 0;
        std::size_t w_offset = 0;  // into theta
        std::size_t b_offset = 0;
    };
    struct Tape;

    void build_layers();
    void forward(std::span<const double> x, Tape& tape) const;
    double quartic_value(std::span<const double> x) const;
    void quartic_grad(std::span<const double> x, std::span<double> out) const;
    /// d/dtheta of the directional derivative grad_x N(x) . v  (tangent-then-adjoint sweep).
    void mixed_vjp(Tape& tape, std::span<const double> v, std::span<double> out) const;

    MlpConfig config_;
    Vector theta_;
    std::vector<Layer> layers_;
};

/// Construct any potential from its config() JSON.
PotentialPtr potential_from_json(const nlohmann::json& j);

}  // namespace golearn
