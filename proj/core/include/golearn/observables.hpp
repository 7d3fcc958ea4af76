#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>

#include <json.hpp>

#include "golearn/potentials.hpp"
#include "golearn/sde.hpp"
#include "golearn/types.hpp"

namespace golearn {

/// Closed interval [lower, upper] in 1-D (either end may be infinite) or an
/// axis-aligned ellipse in 2-D.
struct Region {
    enum class Shape { Interval, Ellipse };

    Shape shape = Shape::Interval;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    Vector center;
    Vector semi_axes;

    static Region interval(double lo, double hi);
    static Region ellipse(Vector center, Vector semi_axes);

    bool contains(std::span<const double> x) const;
    std::string describe() const;
};

enum class ObservableKind { FirstExit, FirstHit, TimeIntegral };

/// Path functional phi = int_0^tau f(X_s) ds, tau the first exit from / hit of
/// `region` (or the cap for TimeIntegral), always capped at t_cap.
struct ObservableSpec {
    ObservableKind kind = ObservableKind::FirstExit;
    Region region;
    double t_cap = 1.0;
    /// Empty means f == 1, so phi = min(tau, t_cap).
    std::function<double(std::span<const double>)> integrand;
    /// Distinguishes integrands in tag(); set when `integrand` is non-empty.
    std::string integrand_name;

    StopRule stop_rule() const;
    std::string tag() const;
    void validate() const;
};

/// Left-endpoint Riemann sum of f along the path up to its stop index.
double evaluate_functional(const ObservableSpec& spec, const PathSample& path);

struct MomentEstimate {
    double mean = 0.0;
    double second_moment = 0.0;
    double variance = 0.0;
    double std_error_mean = 0.0;
    std::size_t n_paths = 0;
    double capped_fraction = 0.0;
};

/// Sample moments of functional values; `n_capped` of them came from capped paths.
MomentEstimate moments_from_values(std::span<const double> values, std::size_t n_capped = 0);

/// Simulate n_paths independent paths (stream i = seed xor i) and estimate moments.
MomentEstimate estimate_moments(const ObservableSpec& spec, const SdeSystem& system,
                                std::size_t n_paths, double dt, std::uint64_t seed);

using JacobianFn = std::function<void(std::span<const double> x, Matrix& out)>;

/// Ito sum  sum_{t < stop} (sigma^{-1} J(X_t))^T sqrt(dt) xi_t  over the path's own increments.
Vector accumulate_martingale(const PathSample& path, const JacobianFn& jacobian,
                             std::size_t num_params, double sigma);
Vector accumulate_martingale(const PathSample& path, const PotentialModel& model, double sigma);

/// Per-path functional values and (optionally) martingale weights for a batch
/// of surrogate paths, computed without storing trajectories.
struct ObservableBatch {
    Vector phi;
    Matrix martingale;  // n_paths x d, empty when not requested
    std::size_t n_capped = 0;
    std::uint64_t fingerprint = 0;
    double dt = 0.0;

    std::size_t size() const { return phi.size(); }
    MomentEstimate moments() const { return moments_from_values(phi, n_capped); }
};

ObservableBatch sample_observable_batch(const ObservableSpec& spec, const PotentialModel& model,
                                        double beta, const Vector& x0, std::size_t n_paths,
                                        double dt, std::uint64_t seed, bool with_martingale);

nlohmann::json to_json(const MomentEstimate& m);

}  // namespace golearn
