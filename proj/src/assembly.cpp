#include "polywave/assembly.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "polywave/errors.hpp"

namespace polywave {

namespace {

// CSR pattern with only the cell-diagonal blocks.
CsrMatrix block_diag_pattern(const DgSpace& space) {
    const int n_loc = space.n_loc;
    CsrMatrix a;
    a.n_rows = a.n_cols = space.n_dofs;
    a.row_offsets.resize(space.n_dofs + 1, 0);
    a.cols.resize(static_cast<std::size_t>(space.n_dofs) * n_loc);
    a.vals.assign(a.cols.size(), 0.0);
    for (int c = 0; c < space.mesh->n_cells(); ++c) {
        const int off = space.offsets[c];
        for (int i = 0; i < n_loc; ++i) {
            const int r = off + i;
            a.row_offsets[r + 1] = a.row_offsets[r] + n_loc;
            for (int j = 0; j < n_loc; ++j) a.cols[a.row_offsets[r] + j] = off + j;
        }
    }
    return a;
}

// CSR pattern with cell-diagonal blocks plus face-neighbor blocks.
CsrMatrix coupled_pattern(const DgSpace& space) {
    const PolyMesh& mesh = *space.mesh;
    const int n_loc = space.n_loc;
    std::vector<std::vector<int>> nbr(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) nbr[c].push_back(c);
    for (int fi : mesh.interior_faces) {
        const Face& f = mesh.faces[fi];
        nbr[f.plus_cell].push_back(f.minus_cell);
        nbr[f.minus_cell].push_back(f.plus_cell);
    }
    for (auto& list : nbr) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    CsrMatrix a;
    a.n_rows = a.n_cols = space.n_dofs;
    a.row_offsets.resize(space.n_dofs + 1, 0);
    std::size_t nnz = 0;
    for (int c = 0; c < mesh.n_cells(); ++c) nnz += nbr[c].size() * n_loc * n_loc;
    a.cols.resize(nnz);
    a.vals.assign(nnz, 0.0);
    std::size_t pos = 0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        for (int i = 0; i < n_loc; ++i) {
            const int r = space.offsets[c] + i;
            a.row_offsets[r] = static_cast<int>(pos);
            for (int v : nbr[c])
                for (int j = 0; j < n_loc; ++j) a.cols[pos++] = space.offsets[v] + j;
        }
    }
    a.row_offsets[space.n_dofs] = static_cast<int>(pos);
    return a;
}

template <typename Fn>
void for_each_index(int n, Exec exec, Fn&& fn) {
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) fn(i);
    } else {
        for (int i = 0; i < n; ++i) fn(i);
    }
}

} // namespace

std::vector<FaceCache> build_face_cache(const DgSpace& space, const MaterialParams& mat,
                                        const StabilizationParams& stab, int n_points, Exec exec) {
    const PolyMesh& mesh = *space.mesh;
    if (n_points <= 0) n_points = space.degree + 2; // exact to 2p+3
    const int n_loc = space.n_loc;
    std::vector<FaceCache> cache(mesh.faces.size());

    for_each_index(static_cast<int>(mesh.faces.size()), exec, [&](int fi) {
        const Face& f = mesh.faces[fi];
        FaceCache& fc = cache[fi];
        SegmentQuadrature q = segment_quadrature(f.endpoints[0], f.endpoints[1], n_points);
        fc.points = std::move(q.points);
        fc.weights = std::move(q.weights);
        fc.chi = stabilization_chi(f, mesh, mat, stab);

        auto fill = [&](int cell, std::vector<double>& val, std::vector<double>& gn) {
            val.resize(fc.points.size() * n_loc);
            gn.resize(fc.points.size() * n_loc);
            std::vector<double> gx(n_loc), gy(n_loc);
            for (std::size_t k = 0; k < fc.points.size(); ++k) {
                evaluate_basis(space, cell, fc.points[k], &val[k * n_loc], gx.data(), gy.data());
                for (int i = 0; i < n_loc; ++i)
                    gn[k * n_loc + i] = f.normal.x * gx[i] + f.normal.y * gy[i];
            }
        };
        fill(f.plus_cell, fc.val_plus, fc.gn_plus);
        if (f.kind == Face::Kind::interior) fill(f.minus_cell, fc.val_minus, fc.gn_minus);
    });
    return cache;
}

BlockDiagMatrix assemble_mass(const DgSpace& space, const ScalarField& weight, Exec exec) {
    const int n_loc = space.n_loc;
    BlockDiagMatrix m = BlockDiagMatrix::zero(space.mesh->n_cells(), n_loc);
    for_each_index(space.mesh->n_cells(), exec, [&](int c) {
        const CellQuadrature& q = weight ? space.quad_cubic[c] : space.quad[c];
        const std::vector<double>& vals = weight ? space.values_cubic[c] : space.values[c];
        double* blk = m.block(c);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const double w = q.weights[k] * (weight ? weight(q.points[k]) : 1.0);
            const double* v = &vals[k * n_loc];
            for (int i = 0; i < n_loc; ++i)
                for (int j = 0; j <= i; ++j) blk[i * n_loc + j] += w * v[i] * v[j];
        }
        for (int i = 0; i < n_loc; ++i)
            for (int j = i + 1; j < n_loc; ++j) blk[i * n_loc + j] = blk[j * n_loc + i];
    });
    return m;
}

CsrMatrix assemble_stiffness(const DgSpace& space, const MaterialParams& mat, Exec exec) {
    CsrMatrix k = block_diag_pattern(space);
    const int n_loc = space.n_loc;
    for_each_index(space.mesh->n_cells(), exec, [&](int c) {
        const double c2 = mat.of_cell(space.mesh->cells[c]).c2();
        const CellQuadrature& q = space.quad[c];
        std::vector<double> val(n_loc), gx(n_loc), gy(n_loc);
        std::vector<double> local(static_cast<std::size_t>(n_loc) * n_loc, 0.0);
        for (std::size_t kq = 0; kq < q.points.size(); ++kq) {
            evaluate_basis(space, c, q.points[kq], val.data(), gx.data(), gy.data());
            const double w = q.weights[kq] * c2;
            for (int i = 0; i < n_loc; ++i)
                for (int j = 0; j <= i; ++j)
                    local[i * n_loc + j] += w * (gx[i] * gx[j] + gy[i] * gy[j]);
        }
        for (int i = 0; i < n_loc; ++i)
            for (int j = i + 1; j < n_loc; ++j) local[i * n_loc + j] = local[j * n_loc + i];
        const int off = space.offsets[c];
        for (int i = 0; i < n_loc; ++i) {
            const int base = k.row_offsets[off + i];
            for (int j = 0; j < n_loc; ++j) k.vals[base + j] = local[i * n_loc + j];
        }
    });
    return k;
}

namespace {

// Per-face local blocks of D or P. Layout: [row_side][col_side] with
// side 0 = plus, 1 = minus; boundary faces only use [0][0].
struct FaceLocal {
    std::array<std::vector<double>, 4> blk;
};

void scatter_face_blocks(CsrMatrix& a, const DgSpace& space, const std::vector<FaceLocal>& locals) {
    const PolyMesh& mesh = *space.mesh;
    const int n_loc = space.n_loc;
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        const int cells[2] = {f.plus_cell, f.minus_cell};
        const int n_sides = f.kind == Face::Kind::interior ? 2 : 1;
        for (int ru = 0; ru < n_sides; ++ru)
            for (int cv = 0; cv < n_sides; ++cv) {
                const auto& blk = locals[fi].blk[ru * 2 + cv];
                if (blk.empty()) continue;
                const int roff = space.offsets[cells[ru]];
                const int coff = space.offsets[cells[cv]];
                for (int i = 0; i < n_loc; ++i) {
                    const int idx0 = a.find(roff + i, coff);
                    for (int j = 0; j < n_loc; ++j) a.vals[idx0 + j] += blk[i * n_loc + j];
                }
            }
    }
}

} // namespace

CsrMatrix assemble_jump_matrix(const DgSpace& space, const MaterialParams& mat,
                               std::span<const FaceCache> cache, Exec exec) {
    const PolyMesh& mesh = *space.mesh;
    const int n_loc = space.n_loc;
    CsrMatrix d = coupled_pattern(space);
    std::vector<FaceLocal> locals(mesh.faces.size());

    for_each_index(static_cast<int>(mesh.faces.size()), exec, [&](int fi) {
        const Face& f = mesh.faces[fi];
        const FaceCache& fc = cache[fi];
        const std::size_t nq = fc.points.size();
        const bool interior = f.kind == Face::Kind::interior;
        const double avg = interior ? 0.5 : 1.0;
        const double c2[2] = {mat.of_cell(mesh.cells[f.plus_cell]).c2(),
                              interior ? mat.of_cell(mesh.cells[f.minus_cell]).c2() : 0.0};
        const std::vector<double>* val[2] = {&fc.val_plus, &fc.val_minus};
        const std::vector<double>* gn[2] = {&fc.gn_plus, &fc.gn_minus};
        const int n_sides = interior ? 2 : 1;
        for (int ru = 0; ru < n_sides; ++ru)
            for (int cv = 0; cv < n_sides; ++cv) {
                auto& blk = locals[fi].blk[ru * 2 + cv];
                blk.assign(static_cast<std::size_t>(n_loc) * n_loc, 0.0);
                const double sign_v = cv == 0 ? 1.0 : -1.0;
                const double scale = sign_v * avg * c2[ru];
                for (std::size_t k = 0; k < nq; ++k) {
                    const double w = fc.weights[k] * scale;
                    const double* vj = &(*val[cv])[k * n_loc];
                    const double* gi = &(*gn[ru])[k * n_loc];
                    for (int i = 0; i < n_loc; ++i)
                        for (int j = 0; j < n_loc; ++j) blk[i * n_loc + j] += w * gi[i] * vj[j];
                }
            }
    });
    scatter_face_blocks(d, space, locals);
    return d;
}

CsrMatrix assemble_jump_matrix(const DgSpace& space, const MaterialParams& mat,
                               const StabilizationParams& stab, Exec exec) {
    auto cache = build_face_cache(space, mat, stab, 0, exec);
    return assemble_jump_matrix(space, mat, cache, exec);
}

CsrMatrix assemble_penalty(const DgSpace& space, std::span<const FaceCache> cache, Exec exec) {
    const PolyMesh& mesh = *space.mesh;
    const int n_loc = space.n_loc;
    CsrMatrix p = coupled_pattern(space);
    std::vector<FaceLocal> locals(mesh.faces.size());

    for_each_index(static_cast<int>(mesh.faces.size()), exec, [&](int fi) {
        const Face& f = mesh.faces[fi];
        const FaceCache& fc = cache[fi];
        const std::size_t nq = fc.points.size();
        const bool interior = f.kind == Face::Kind::interior;
        const std::vector<double>* val[2] = {&fc.val_plus, &fc.val_minus};
        const int n_sides = interior ? 2 : 1;
        for (int ru = 0; ru < n_sides; ++ru)
            for (int cv = 0; cv < n_sides; ++cv) {
                auto& blk = locals[fi].blk[ru * 2 + cv];
                blk.assign(static_cast<std::size_t>(n_loc) * n_loc, 0.0);
                const double sign = (ru == cv) ? 1.0 : -1.0; // n+ . n- = -1
                for (std::size_t k = 0; k < nq; ++k) {
                    const double w = fc.weights[k] * fc.chi * sign;
                    const double* vi = &(*val[ru])[k * n_loc];
                    const double* vj = &(*val[cv])[k * n_loc];
                    for (int i = 0; i < n_loc; ++i)
                        for (int j = 0; j < n_loc; ++j) blk[i * n_loc + j] += w * vi[i] * vj[j];
                }
            }
    });
    scatter_face_blocks(p, space, locals);
    return p;
}

CsrMatrix assemble_penalty(const DgSpace& space, const MaterialParams& mat,
                           const StabilizationParams& stab, Exec exec) {
    auto cache = build_face_cache(space, mat, stab, 0, exec);
    return assemble_penalty(space, cache, exec);
}

CsrMatrix combined_operator(const CsrMatrix& k, const CsrMatrix& d, const CsrMatrix& p) {
    if (k.n_rows != d.n_rows || d.n_rows != p.n_rows || k.n_cols != d.n_cols ||
        d.n_cols != p.n_cols)
        throw NumericError("combined_operator: dimension mismatch");
    CsrMatrix dt = transpose(d);
    CsrMatrix kd = add_scaled(k, d, 1.0, -1.0);
    CsrMatrix kddt = add_scaled(kd, dt, 1.0, -1.0);
    return add_scaled(kddt, p, 1.0, 1.0);
}

std::vector<double> assemble_dirichlet_vector(const DgSpace& space, const BoundaryField& g,
                                              const BoundaryField& g_dot,
                                              const MaterialParams& mat,
                                              std::span<const FaceCache> cache, double t) {
    const PolyMesh& mesh = *space.mesh;
    const int n_loc = space.n_loc;
    std::vector<double> w(space.n_dofs, 0.0);
    for (int fi : mesh.boundary_faces) {
        const Face& f = mesh.faces[fi];
        const FaceCache& fc = cache[fi];
        const auto& row = mat.of_cell(mesh.cells[f.plus_cell]);
        const double c2 = row.c2();
        const double boc2 = row.b_over_c2();
        double* out = &w[space.offsets[f.plus_cell]];
        for (std::size_t k = 0; k < fc.points.size(); ++k) {
            const double gt = g(fc.points[k], t, f.boundary_tag) +
                              boc2 * g_dot(fc.points[k], t, f.boundary_tag);
            if (gt == 0.0) continue;
            const double wq = fc.weights[k] * gt;
            const double* vi = &fc.val_plus[k * n_loc];
            const double* gi = &fc.gn_plus[k * n_loc];
            for (int i = 0; i < n_loc; ++i) out[i] += wq * (-c2 * gi[i] + fc.chi * vi[i]);
        }
    }
    return w;
}

std::vector<double> assemble_dirichlet_vector(const DgSpace& space, const BoundaryField& g,
                                              const BoundaryField& g_dot,
                                              const MaterialParams& mat,
                                              const StabilizationParams& stab, double t) {
    auto cache = build_face_cache(space, mat, stab, 0, Exec::serial);
    return assemble_dirichlet_vector(space, g, g_dot, mat, cache, t);
}

std::vector<double> assemble_source(const DgSpace& space, const TimeField& f, double t, Exec exec) {
    const int n_loc = space.n_loc;
    std::vector<double> rhs(space.n_dofs, 0.0);
    for_each_index(space.mesh->n_cells(), exec, [&](int c) {
        const CellQuadrature& q = space.quad[c];
        const std::vector<double>& vals = space.values[c];
        double* out = &rhs[space.offsets[c]];
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const double wf = q.weights[k] * f(q.points[k], t);
            const double* v = &vals[k * n_loc];
            for (int i = 0; i < n_loc; ++i) out[i] += wf * v[i];
        }
    });
    return rhs;
}

BlockDiagMatrix assemble_nonlinear_mass(const DgSpace& space, std::span<const double> psi_dot,
                                        const MaterialParams& mat, Exec exec,
                                        double* degeneracy_max) {
    const int n_loc = space.n_loc;
    const int n_cells = space.mesh->n_cells();
    BlockDiagMatrix nl = BlockDiagMatrix::zero(n_cells, n_loc);
    std::vector<double> cell_degen(degeneracy_max ? n_cells : 0, 0.0);

    for_each_index(n_cells, exec, [&](int c) {
        const double two_k = 2.0 * mat.of_cell(space.mesh->cells[c]).k();
        const CellQuadrature& q = space.quad_cubic[c];
        const std::vector<double>& vals = space.values_cubic[c];
        const double* coeffs = &psi_dot[space.offsets[c]];
        double* blk = nl.block(c);
        double degen = 0.0;
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const double* v = &vals[k * n_loc];
            double pd = 0.0;
            for (int l = 0; l < n_loc; ++l) pd += coeffs[l] * v[l];
            const double factor = two_k * pd;
            degen = std::max(degen, std::abs(factor));
            const double w = q.weights[k] * factor;
            for (int i = 0; i < n_loc; ++i) {
                const double wvi = w * v[i];
                for (int j = 0; j <= i; ++j) blk[i * n_loc + j] += wvi * v[j];
            }
        }
        for (int i = 0; i < n_loc; ++i)
            for (int j = i + 1; j < n_loc; ++j) blk[i * n_loc + j] = blk[j * n_loc + i];
        if (degeneracy_max) cell_degen[c] = degen;
    });
    if (degeneracy_max) {
        double m = 0.0;
        for (double d : cell_degen) m = std::max(m, d);
        *degeneracy_max = m;
    }
    return nl;
}

GlobalOperators assemble_operators(const DgSpace& space, const MaterialParams& mat,
                                   const StabilizationParams& stab, Exec exec) {
    GlobalOperators ops;
    ops.face_cache = build_face_cache(space, mat, stab, 0, exec);
    ops.mass = assemble_mass(space, nullptr, exec);
    ops.stiffness = assemble_stiffness(space, mat, exec);
    ops.jump = assemble_jump_matrix(space, mat, ops.face_cache, exec);
    ops.penalty = assemble_penalty(space, ops.face_cache, exec);
    ops.ktilde = combined_operator(ops.stiffness, ops.jump, ops.penalty);

    const int n_loc = space.n_loc;
    ops.ktilde_diag_index.resize(static_cast<std::size_t>(space.n_dofs) * n_loc);
    for (int c = 0; c < space.mesh->n_cells(); ++c) {
        const int off = space.offsets[c];
        for (int i = 0; i < n_loc; ++i) {
            const int base = ops.ktilde.find(off + i, off);
            for (int j = 0; j < n_loc; ++j)
                ops.ktilde_diag_index[static_cast<std::size_t>(off + i) * n_loc + j] = base + j;
        }
    }
    return ops;
}

void dump_coordinate_format(const CsrMatrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("dump_coordinate_format: cannot open " + path);
    char buf[96];
    for (int r = 0; r < a.n_rows; ++r)
        for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r, a.cols[k], a.vals[k]);
            out << buf;
        }
}

} // namespace polywave
