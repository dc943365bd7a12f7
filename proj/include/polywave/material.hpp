#pragma once

#include <vector>

#include "polywave/errors.hpp"
#include "polywave/mesh.hpp"

namespace polywave {

/// Physical coefficients of the Westervelt model, per mesh region.
/// A uniform medium is a single-row table.
struct MaterialParams {
    struct Row {
        double c = 1.0;      // speed of sound
        double b = 0.0;      // sound diffusivity
        double beta_a = 0.0; // coefficient of nonlinearity
        double rho = 1.0;    // mass density

        double k() const { return beta_a / (c * c); }
        double c2() const { return c * c; }
        double b_over_c2() const { return b / (c * c); }
    };
    std::vector<Row> regions;

    static MaterialParams uniform(double c, double b, double beta_a, double rho) {
        MaterialParams m;
        m.regions.push_back({c, b, beta_a, rho});
        m.validate();
        return m;
    }
    void validate() const {
        if (regions.empty()) throw ConfigError("MaterialParams: no regions");
        for (const Row& r : regions) {
            if (!(r.c > 0.0)) throw ConfigError("MaterialParams: c must be positive");
            if (r.b < 0.0) throw ConfigError("MaterialParams: b must be non-negative");
            if (!(r.rho > 0.0)) throw ConfigError("MaterialParams: rho must be positive");
        }
    }
    bool piecewise() const { return regions.size() > 1; }
    bool nonlinear() const {
        for (const Row& r : regions)
            if (r.beta_a != 0.0) return true;
        return false;
    }
    const Row& of(int region_tag) const {
        if (region_tag < 0 || region_tag >= static_cast<int>(regions.size()))
            throw ConfigError("MaterialParams: cell region tag outside the table");
        return regions[region_tag];
    }
    const Row& of_cell(const Cell& cell) const { return of(cell.region_tag); }
};

struct StabilizationParams {
    double beta = 10.0; // penalty scale
    int p = 1;          // polynomial degree entering p^2/h
};

/// Interior-penalty stabilization function on one face.
/// Uniform medium: chi = beta * c^2 * max(p^2/h); piecewise-constant medium:
/// chi = beta * max(c^2|k * p^2/h) with the per-cell c^2 inside the max.
inline double stabilization_chi(const Face& face, const PolyMesh& mesh, const MaterialParams& mat,
                                const StabilizationParams& stab) {
    const double p2 = static_cast<double>(stab.p) * stab.p;
    const double q_plus = p2 / mesh.cells[face.plus_cell].diameter;
    if (face.kind == Face::Kind::boundary)
        return stab.beta * mat.of_cell(mesh.cells[face.plus_cell]).c2() * q_plus;
    const double q_minus = p2 / mesh.cells[face.minus_cell].diameter;
    if (mat.piecewise()) {
        const double lhs = mat.of_cell(mesh.cells[face.plus_cell]).c2() * q_plus;
        const double rhs = mat.of_cell(mesh.cells[face.minus_cell]).c2() * q_minus;
        return stab.beta * std::max(lhs, rhs);
    }
    return stab.beta * (mat.regions[0].c2() * std::max(q_plus, q_minus));
}

} // namespace polywave
