#pragma once

#include <array>
#include <span>
#include <vector>

#include "polywave/geom.hpp"

namespace polywave {

/// Gauss-Legendre nodes and weights on [0,1]; exact for polynomials of degree 2n-1.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

/// Quadrature rule on the reference triangle {x,y >= 0, x+y <= 1}.
/// Weights are area fractions (they sum to 1); all weights are positive.
struct TriangleRule {
    std::vector<Point2> points;
    std::vector<double> weights;
    int degree = 0;
};

/// Smallest available rule exact for polynomials of total degree `degree`.
/// Throws ConfigError above the supported maximum.
const TriangleRule& triangle_rule(int degree);
constexpr int kMaxTriangleDegree = 60;

/// Exact integral of x^a y^b over a simple polygon, via the divergence-theorem
/// boundary formula with edge-wise closed-form (binomial) evaluation.
double polygon_monomial_integral(std::span<const Point2> loop, int a, int b);

/// Points and weights on one polygonal cell; weights sum to the cell area.
struct CellQuadrature {
    std::vector<Point2> points;
    std::vector<double> weights;
};

/// Quadrature from a sub-triangulation composed with a triangle rule.
CellQuadrature triangle_fan_quadrature(std::span<const std::array<Point2, 3>> triangles, int degree);

/// Volume rule on one mesh cell, exact to `degree`.
template <typename CellT>
CellQuadrature build_volume_quadrature(const CellT& cell, int degree) {
    return triangle_fan_quadrature(cell.sub_triangles, degree);
}

/// Gauss-Legendre points on the segment [a,b]; weights sum to the segment length.
struct SegmentQuadrature {
    std::vector<Point2> points;
    std::vector<double> weights;
};
SegmentQuadrature segment_quadrature(Point2 a, Point2 b, int n_points);

} // namespace polywave
