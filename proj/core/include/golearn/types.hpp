#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "golearn/errors.hpp"

namespace golearn {

using Vector = std::vector<double>;

/// Dense row-major matrix. Small sizes only (m x d Jacobians).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// A set of states in R^dim stored contiguously.
struct StateSet {
    std::size_t dim = 1;
    std::vector<double> data;

    StateSet() = default;
    explicit StateSet(std::size_t d) : dim(d) {}
    StateSet(std::size_t d, std::vector<double> flat) : dim(d), data(std::move(flat)) {
        if (d == 0 || data.size() % d != 0) throw DimMismatch("state set storage is not a multiple of dim");
    }

    std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
    bool empty() const { return data.empty(); }
    std::span<const double> operator[](std::size_t i) const { return {data.data() + i * dim, dim}; }
    std::span<double> operator[](std::size_t i) { return {data.data() + i * dim, dim}; }
    void push_back(std::span<const double> x) {
        if (x.size() != dim) throw DimMismatch("state dimension mismatch in StateSet::push_back");
        data.insert(data.end(), x.begin(), x.end());
    }
};

/// States with normalized weights: either Monte Carlo samples (uniform weights)
/// or quadrature nodes of an invariant density. Expectations over pi are
/// written once against this type.
struct WeightedStates {
    StateSet states;
    std::vector<double> weights;

    static WeightedStates uniform(StateSet s) {
        WeightedStates w;
        const std::size_t n = s.size();
        w.states = std::move(s);
        w.weights.assign(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
        return w;
    }
    std::size_t size() const { return weights.size(); }
    bool empty() const { return weights.empty(); }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return dot(a, a); }

}  // namespace golearn
