#pragma once

#include <cstddef>
#include <vector>

#include "chsep/errors.hpp"

namespace chsep {

/// Uniform 2D periodic grid on [0,Lx) x [0,Ly).
struct Grid {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;

    double dx() const { return lx / nx; }
    double dy() const { return ly / ny; }
    double cell_area() const { return dx() * dy(); }
    double area() const { return lx * ly; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.nx == b.nx && a.ny == b.ny && a.lx == b.lx && a.ly == b.ly;
    }
};

/// Grid sample of a scalar quantity, x-major storage: values[ix*ny + iy].
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid(g), values(g.size(), 0.0) {}
    ScalarField(const Grid& g, double fill) : grid(g), values(g.size(), fill) {}

    static ScalarField constant(const Grid& g, double v) { return ScalarField(g, v); }

    double& at(int ix, int iy) { return values[static_cast<std::size_t>(ix) * grid.ny + iy]; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(ix) * grid.ny + iy]; }
};

/// Area-weighted average (1/|Omega|) int v. Kahan-compensated so the
/// per-step mass identity can be checked at the 1e-13 level.
double mean(const ScalarField& v);

double min_value(const ScalarField& v);
double max_value(const ScalarField& v);
double max_abs(const ScalarField& v);

inline void require_same_grid(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) throw GridMismatch("fields live on different grids");
}

} // namespace chsep
