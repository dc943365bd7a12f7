#pragma once

#include <functional>

#include "polywave/basis.hpp"
#include "polywave/material.hpp"
#include "polywave/sparse.hpp"

namespace polywave {

/// Per-face quadrature with traces of the adjacent cells' bases.
/// `gn` holds the normal derivative n+.grad of each basis function.
struct FaceCache {
    double chi = 0.0;
    std::vector<Point2> points;
    std::vector<double> weights;
    std::vector<double> val_plus, gn_plus;   // [q * n_loc + i]
    std::vector<double> val_minus, gn_minus; // interior faces only
};

/// Traces at n_points Gauss points per face. n_points <= 0 picks the default
/// assembly rule ceil((2p+3)/2) = p+2.
std::vector<FaceCache> build_face_cache(const DgSpace& space, const MaterialParams& mat,
                                        const StabilizationParams& stab, int n_points = 0,
                                        Exec exec = Exec::parallel);

using ScalarField = std::function<double(Point2)>;
using TimeField = std::function<double(Point2, double)>;
using BoundaryField = std::function<double(Point2, double, int tag)>;

/// Mass matrix; optional weight field raises the quadrature to the cubic rule.
BlockDiagMatrix assemble_mass(const DgSpace& space, const ScalarField& weight = nullptr,
                              Exec exec = Exec::parallel);

/// K: c^2-weighted broken gradient products (cell-block diagonal in CSR form).
CsrMatrix assemble_stiffness(const DgSpace& space, const MaterialParams& mat,
                             Exec exec = Exec::parallel);

/// D: sum over faces of <[[N_j]], {{c^2 grad N_i}}>.
CsrMatrix assemble_jump_matrix(const DgSpace& space, const MaterialParams& mat,
                               const StabilizationParams& stab, Exec exec = Exec::parallel);
CsrMatrix assemble_jump_matrix(const DgSpace& space, const MaterialParams& mat,
                               std::span<const FaceCache> cache, Exec exec);

/// P: sum over faces of <chi [[N_j]], [[N_i]]>; symmetric positive semi-definite.
CsrMatrix assemble_penalty(const DgSpace& space, const MaterialParams& mat,
                           const StabilizationParams& stab, Exec exec = Exec::parallel);
CsrMatrix assemble_penalty(const DgSpace& space, std::span<const FaceCache> cache, Exec exec);

/// Ktilde = K - D - D^T + P.
CsrMatrix combined_operator(const CsrMatrix& k, const CsrMatrix& d, const CsrMatrix& p);

/// Weak Dirichlet data vector w(t): boundary terms -c^2 g~ (grad v . n) + chi g~ v
/// with g~ = g + (b/c^2) g_dot.
std::vector<double> assemble_dirichlet_vector(const DgSpace& space, const BoundaryField& g,
                                              const BoundaryField& g_dot,
                                              const MaterialParams& mat,
                                              const StabilizationParams& stab, double t);
std::vector<double> assemble_dirichlet_vector(const DgSpace& space, const BoundaryField& g,
                                              const BoundaryField& g_dot,
                                              const MaterialParams& mat,
                                              std::span<const FaceCache> cache, double t);

/// Volume source vector (f(.,t), N_i).
std::vector<double> assemble_source(const DgSpace& space, const TimeField& f, double t,
                                    Exec exec = Exec::parallel);

/// Block-diagonal N(psi_dot) with entries (2k psi_dot_h N_j, N_i); realizes the
/// nonlinearity tensor contraction without materializing it. Also reports
/// max |2k psi_dot_h| over the quadrature points when degeneracy_max != null.
BlockDiagMatrix assemble_nonlinear_mass(const DgSpace& space, std::span<const double> psi_dot,
                                        const MaterialParams& mat, Exec exec = Exec::parallel,
                                        double* degeneracy_max = nullptr);

/// Everything the time stepper needs, assembled once.
struct GlobalOperators {
    BlockDiagMatrix mass;
    CsrMatrix stiffness;
    CsrMatrix jump;
    CsrMatrix penalty;
    CsrMatrix ktilde;
    std::vector<FaceCache> face_cache;
    std::vector<int> ktilde_diag_index; // (cell*n_loc + i)*n_loc + j -> vals index
};

GlobalOperators assemble_operators(const DgSpace& space, const MaterialParams& mat,
                                   const StabilizationParams& stab, Exec exec = Exec::parallel);

/// Debug dump in "row col value" coordinate text format.
void dump_coordinate_format(const CsrMatrix& a, const std::string& path);

} // namespace polywave
