#pragma once

#include <utility>

#include <json.hpp>

#include "golearn/potentials.hpp"
#include "golearn/quadrature.hpp"
#include "golearn/types.hpp"

namespace golearn {

/// Uniform 1-D grid on [x_min, x_max]. The right end is always an absorbing
/// (Dirichlet) exit boundary; the left end is either absorbing or a truncation
/// point with a zero-derivative condition.
struct Grid1D {
    enum class LeftBoundary { NoFlux, Dirichlet };

    double x_min = -3.0;
    double x_max = 1.0;
    std::size_t n_nodes = 2001;
    LeftBoundary left = LeftBoundary::NoFlux;

    double spacing() const { return (x_max - x_min) / static_cast<double>(n_nodes - 1); }
    double node(std::size_t i) const { return x_min + spacing() * static_cast<double>(i); }
    void validate() const;
};

/// Grid for exit through `exit_point` from (-inf, exit_point]: the left end is
/// placed where the Gibbs mass to its left is below `mass_tol`.
Grid1D exit_grid_for(const PotentialModel& v, double beta, double exit_point, std::size_t n_nodes,
                     double mass_tol = 1e-10, double search_lo = -10.0);

/// First and second moments of the exit time on the grid nodes.
struct ExitMoments {
    Grid1D grid;
    Vector m1;
    Vector m2;

    /// Linear interpolation of (E[tau], E[tau^2]) at x0.
    std::pair<double, double> evaluated_at(double x0) const;
};

/// Solves L m1 = -1 and L m2 = -2 m1 with L = beta^{-1} d^2/dx^2 + b d/dx by
/// second-order central differences and a tridiagonal solve.
ExitMoments solve_exit_moments(const ScalarFn& drift, double beta, const Grid1D& grid);
ExitMoments solve_exit_moments(const PotentialModel& v, double beta, const Grid1D& grid);

/// E^x[ int_0^tau f(X_s) ds ] on the grid nodes: solves L w = -f with the same
/// boundary conditions. With f = 1/2 ||sigma^{-1}(b - b_tilde)||^2 this is the
/// KL divergence between the stopped path laws.
Vector solve_exit_functional(const ScalarFn& drift, double beta, const Grid1D& grid,
                             const ScalarFn& source);

/// Linear interpolation of a grid function.
double interpolate(const Grid1D& grid, const Vector& values, double x);

/// Thomas algorithm for a tridiagonal system; `lower[0]` and `upper[n-1]` are unused.
Vector solve_tridiagonal(const Vector& lower, const Vector& diag, const Vector& upper,
                         const Vector& rhs);

}  // namespace golearn
