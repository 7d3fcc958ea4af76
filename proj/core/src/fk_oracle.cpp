#include "golearn/fk_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace golearn {

void Grid1D::validate() const {
    if (!(x_min < x_max)) throw ConfigError("grid requires x_min < x_max");
    if (n_nodes < 3) throw ConfigError("grid requires at least three nodes");
}

Grid1D exit_grid_for(const PotentialModel& v, double beta, double exit_point, std::size_t n_nodes,
                     double mass_tol, double search_lo) {
    if (v.dim() != 1) throw DimMismatch("exit grids are one-dimensional");
    constexpr std::size_t kScan = 40001;
    const double h = (exit_point - search_lo) / static_cast<double>(kScan - 1);
    Vector e(kScan);
    double vmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kScan; ++i) {
        const double x = search_lo + h * static_cast<double>(i);
        e[i] = v.value(std::span<const double>(&x, 1));
        vmin = std::min(vmin, e[i]);
    }
    Vector cum(kScan, 0.0);
    for (std::size_t i = 1; i < kScan; ++i) {
        cum[i] = cum[i - 1] +
                 0.5 * h * (std::exp(-beta * (e[i - 1] - vmin)) + std::exp(-beta * (e[i] - vmin)));
    }
    const double total = cum.back();
    std::size_t cut = 0;
    while (cut + 1 < kScan && cum[cut + 1] < mass_tol * total) ++cut;
    if (cut == 0) throw BoundaryTooClose("Gibbs mass reaches the search window; lower search_lo");
    Grid1D g;
    g.x_min = search_lo + h * static_cast<double>(cut);
    g.x_max = exit_point;
    g.n_nodes = n_nodes;
    g.left = Grid1D::LeftBoundary::NoFlux;
    return g;
}

double interpolate(const Grid1D& grid, const Vector& values, double x) {
    const double h = grid.spacing();
    double t = (x - grid.x_min) / h;
    t = std::clamp(t, 0.0, static_cast<double>(grid.n_nodes - 1));
    const auto i = std::min(static_cast<std::size_t>(t), grid.n_nodes - 2);
    const double w = t - static_cast<double>(i);
    return (1.0 - w) * values[i] + w * values[i + 1];
}

std::pair<double, double> ExitMoments::evaluated_at(double x0) const {
    if (x0 >= grid.x_max) return {0.0, 0.0};
    return {interpolate(grid, m1, x0), interpolate(grid, m2, x0)};
}

Vector solve_tridiagonal(const Vector& lower, const Vector& diag, const Vector& upper,
                         const Vector& rhs) {
    const std::size_t n = diag.size();
    Vector c(n), d(n), x(n);
    double denom = diag[0];
    if (std::abs(denom) < 1e-300) throw SingularSystem("zero pivot in tridiagonal solve");
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * c[i - 1];
        if (std::abs(denom) < 1e-300 || !std::isfinite(denom)) {
            throw SingularSystem("zero pivot in tridiagonal solve at row " + std::to_string(i));
        }
        c[i] = i + 1 < n ? upper[i] / denom : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    for (double v : x) {
        if (!std::isfinite(v)) throw SingularSystem("non-finite solution of tridiagonal system");
    }
    return x;
}

namespace {

void check_truncation(const Vector& b, double beta, const Grid1D& grid) {
    // Potential up to a constant from V' = -b, then compare the Gibbs mass in the
    // first cell with the total on the grid.
    const std::size_t n = grid.n_nodes;
    const double h = grid.spacing();
    Vector v(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) v[i] = v[i - 1] - 0.5 * h * (b[i - 1] + b[i]);
    const double vmin = *std::min_element(v.begin(), v.end());
    double total = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        total += 0.5 * h * (std::exp(-beta * (v[i - 1] - vmin)) + std::exp(-beta * (v[i] - vmin)));
    }
    const double first = 0.5 * h * (std::exp(-beta * (v[0] - vmin)) + std::exp(-beta * (v[1] - vmin)));
    if (first > 1e-6 * total) {
        throw BoundaryTooClose("Gibbs mass near the truncated left boundary is " +
                               std::to_string(first / total));
    }
}

}  // namespace

namespace {

/// Discretized generator with boundary rows; solve(f) returns w with L w = -f.
class GeneratorSystem {
public:
    GeneratorSystem(const ScalarFn& drift, double beta, const Grid1D& grid) : grid_(grid) {
        grid.validate();
        if (!(beta > 0.0)) throw ConfigError("beta must be positive");
        const std::size_t n = grid.n_nodes;
        const double h = grid.spacing();
        Vector b(n);
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = drift(grid.node(i));
            if (!std::isfinite(b[i])) throw SingularSystem("drift is not finite on the grid");
        }
        if (grid.left == Grid1D::LeftBoundary::NoFlux) check_truncation(b, beta, grid);

        const double diff = 1.0 / (beta * h * h);
        lower_.assign(n, 0.0);
        diag_.assign(n, 0.0);
        upper_.assign(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            lower_[i] = diff - b[i] / (2.0 * h);
            diag_[i] = -2.0 * diff;
            upper_[i] = diff + b[i] / (2.0 * h);
        }
        if (grid.left == Grid1D::LeftBoundary::NoFlux) {
            // Ghost node m_{-1} = m_1.
            diag_[0] = -2.0 * diff;
            upper_[0] = 2.0 * diff;
        } else {
            diag_[0] = 1.0;
        }
        diag_[n - 1] = 1.0;
    }

    Vector solve(const Vector& source) const {
        const std::size_t n = grid_.n_nodes;
        Vector rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = -source[i];
        if (grid_.left == Grid1D::LeftBoundary::Dirichlet) rhs[0] = 0.0;
        rhs[n - 1] = 0.0;
        return solve_tridiagonal(lower_, diag_, upper_, rhs);
    }

private:
    Grid1D grid_;
    Vector lower_, diag_, upper_;
};

}  // namespace

ExitMoments solve_exit_moments(const ScalarFn& drift, double beta, const Grid1D& grid) {
    const GeneratorSystem system(drift, beta, grid);
    const std::size_t n = grid.n_nodes;
    ExitMoments out;
    out.grid = grid;
    out.m1 = system.solve(Vector(n, 1.0));
    Vector twice(n);
    for (std::size_t i = 0; i < n; ++i) twice[i] = 2.0 * out.m1[i];
    out.m2 = system.solve(twice);
    return out;
}

Vector solve_exit_functional(const ScalarFn& drift, double beta, const Grid1D& grid,
                             const ScalarFn& source) {
    const GeneratorSystem system(drift, beta, grid);
    Vector f(grid.n_nodes);
    for (std::size_t i = 0; i < grid.n_nodes; ++i) f[i] = source(grid.node(i));
    return system.solve(f);
}

ExitMoments solve_exit_moments(const PotentialModel& v, double beta, const Grid1D& grid) {
    if (v.dim() != 1) throw DimMismatch("Feynman-Kac oracle is one-dimensional");
    return solve_exit_moments(
        [&v](double x) {
            double out = 0.0;
            v.drift(std::span<const double>(&x, 1), std::span<double>(&out, 1));
            return out;
        },
        beta, grid);
}

}  // namespace golearn
