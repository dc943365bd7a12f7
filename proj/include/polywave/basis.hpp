#pragma once

#include <functional>
#include <span>
#include <vector>

#include "polywave/mesh.hpp"
#include "polywave/quadrature.hpp"

namespace polywave {

enum class Exec { serial, parallel };

/// Modal DG space of uniform total degree p on a polygonal mesh.
/// Each cell carries an L2-orthonormal basis obtained from bounding-box-scaled
/// monomials; basis k is stored as a row of the lower-triangular coefficient
/// matrix over the monomial ordering (0,0),(1,0),(0,1),(2,0),(1,1),...
struct CellBasis {
    Point2 center;       // bounding box center
    double inv_hx = 1.0; // 1 / half-width
    double inv_hy = 1.0;
    std::vector<double> coeff; // n_loc x n_loc, row-major, lower-triangular
};

struct DgSpace {
    const PolyMesh* mesh = nullptr;
    int degree = 0;
    int n_loc = 0;
    int n_dofs = 0;
    std::vector<int> offsets; // first global dof of each cell

    std::vector<CellBasis> cell_basis;

    // Volume quadratures: `quad` exact to 2p+2 (bilinear terms, sources,
    // projections), `quad_cubic` exact to 3p+1 (the nonlinear mass term).
    std::vector<CellQuadrature> quad;
    std::vector<CellQuadrature> quad_cubic;
    // Cached basis values at the quadrature points, laid out [q * n_loc + i].
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> values_cubic;

    int offset(int cell) const { return offsets[cell]; }
};

DgSpace build_space(const PolyMesh& mesh, int degree, Exec exec = Exec::parallel);

/// Basis values (and optionally analytic gradients) at an arbitrary point.
/// `values` must have room for n_loc entries; `grad_x`/`grad_y` likewise when
/// non-null.
void evaluate_basis(const DgSpace& space, int cell, Point2 p, double* values,
                    double* grad_x = nullptr, double* grad_y = nullptr);

/// Element-wise L2 projection; with orthonormal bases the coefficients are
/// the moments of f against the basis.
std::vector<double> project(const DgSpace& space, const std::function<double(Point2)>& f,
                            Exec exec = Exec::parallel);

/// Field value at a point of a cell from a global coefficient vector.
double evaluate_field(const DgSpace& space, int cell, Point2 p, std::span<const double> coeffs);

/// Gram matrix of one cell's basis computed by quadrature (diagnostic).
std::vector<double> cell_gram(const DgSpace& space, int cell);

} // namespace polywave
