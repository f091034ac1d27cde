#pragma once

/// Periodic regular grids on the unit torus, fields living on them, and the
/// two discrete norms used throughout: the grid L2 norm (carries the h^dim
/// quadrature weight) and the plain vector 2-norm.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlft {

/// Base of the error taxonomy.  Subclasses map onto the CLI exit-code
/// contract: config 2, solver 3, training 4, kernel 5, budget 6.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct SolverError : Error {
    using Error::Error;
};
struct TrainingError : Error {
    using Error::Error;
};
struct KernelError : Error {
    using Error::Error;
};
struct BudgetError : Error {
    using Error::Error;
};

/// Evenly spaced periodic grid on [0,1)^dim with n nodes per axis.
/// The step is always exactly 1/n; node (i,j) sits at (i*h, j*h).
struct Grid {
    int dim = 1;  // 1 or 2
    int n = 0;    // nodes per axis

    Grid() = default;
    Grid(int dim_, int n_) : dim(dim_), n(n_) {
        if (dim != 1 && dim != 2) throw ConfigError("grid: dim must be 1 or 2");
        if (n < 1) throw ConfigError("grid: n must be positive");
    }

    double h() const { return 1.0 / n; }
    std::size_t size() const {
        return dim == 1 ? static_cast<std::size_t>(n)
                        : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    }
    bool operator==(const Grid& o) const { return dim == o.dim && n == o.n; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

/// Scalar field on a Grid; dim=2 values are row-major, index = i*n + j for
/// node (x,y) = (i*h, j*h).
struct Field {
    Grid grid;
    std::vector<double> a;

    Field() = default;
    explicit Field(Grid g, double fill = 0.0) : grid(g), a(g.size(), fill) {}
    Field(Grid g, std::vector<double> values) : grid(g), a(std::move(values)) {
        if (a.size() != grid.size()) throw ConfigError("field: value count does not match grid");
    }

    double& operator[](std::size_t i) { return a[i]; }
    double operator[](std::size_t i) const { return a[i]; }
    std::size_t size() const { return a.size(); }

    // 2-D accessor, periodic callers wrap indices themselves.
    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * grid.n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * grid.n + j]; }
};

inline bool finite(const Field& f) {
    for (double x : f.a)
        if (!std::isfinite(x)) return false;
    return true;
}

/// sqrt(sum f_i^2): the vector 2-norm of the node values.
inline double vec2(const Field& f) {
    double s = 0.0;
    for (double x : f.a) s += x * x;
    return std::sqrt(s);
}

/// sqrt(h^dim * sum f_i^2): trapezoidal-exact L2 norm on the periodic grid.
inline double grid_l2(const Field& f) {
    return vec2(f) * std::pow(f.grid.h(), f.grid.dim / 2.0);
}

inline double field_mean(const Field& f) {
    double s = 0.0;
    for (double x : f.a) s += x;
    return s / static_cast<double>(f.a.size());
}

inline Field operator+(const Field& f, const Field& g) {
    if (f.grid != g.grid) throw ConfigError("field add: grid mismatch");
    Field r = f;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += g.a[i];
    return r;
}

inline Field operator-(const Field& f, const Field& g) {
    if (f.grid != g.grid) throw ConfigError("field sub: grid mismatch");
    Field r = f;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= g.a[i];
    return r;
}

inline Field operator*(double s, const Field& f) {
    Field r = f;
    for (double& x : r.a) x *= s;
    return r;
}

inline Field& operator+=(Field& f, const Field& g) {
    if (f.grid != g.grid) throw ConfigError("field add: grid mismatch");
    for (std::size_t i = 0; i < f.a.size(); ++i) f.a[i] += g.a[i];
    return f;
}

}  // namespace mlft
