#include "polywave/basis.hpp"

#include <cmath>
#include <cstring>

#include "polywave/errors.hpp"

namespace polywave {

namespace {

// Scaled monomial values at a point: X^i Y^j in graded order, i+j <= p.
void scaled_monomials(int p, double X, double Y, double* out) {
    int k = 0;
    for (int d = 0; d <= p; ++d)
        for (int i = d; i >= 0; --i) {
            const int j = d - i;
            double v = 1.0;
            for (int a = 0; a < i; ++a) v *= X;
            for (int a = 0; a < j; ++a) v *= Y;
            out[k++] = v;
        }
}

void scaled_monomial_gradients(int p, double X, double Y, double inv_hx, double inv_hy,
                               double* gx, double* gy) {
    int k = 0;
    for (int d = 0; d <= p; ++d)
        for (int i = d; i >= 0; --i) {
            const int j = d - i;
            double xi = 1.0, yj = 1.0, xim = 1.0, yjm = 1.0;
            for (int a = 0; a < i; ++a) xi *= X;
            for (int a = 0; a < j; ++a) yj *= Y;
            for (int a = 0; a + 1 < i; ++a) xim *= X;
            for (int a = 0; a + 1 < j; ++a) yjm *= Y;
            gx[k] = i > 0 ? i * xim * yj * inv_hx : 0.0;
            gy[k] = j > 0 ? j * xi * yjm * inv_hy : 0.0;
            ++k;
        }
}

// In-place Cholesky G = L L^T (lower). Returns false on a non-positive pivot.
bool cholesky(std::vector<double>& a, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
        for (int j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
    }
    return true;
}

// C <- L^{-1} C by forward substitution on each column block (row-major C).
void apply_inverse_lower(const std::vector<double>& L, std::vector<double>& C, int n) {
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) {
            const double lik = L[i * n + k];
            for (int j = 0; j < n; ++j) C[i * n + j] -= lik * C[k * n + j];
        }
        const double inv = 1.0 / L[i * n + i];
        for (int j = 0; j < n; ++j) C[i * n + j] *= inv;
    }
}

} // namespace

DgSpace build_space(const PolyMesh& mesh, int degree, Exec exec) {
    if (degree < 0) throw ConfigError("build_space: degree must be >= 0");
    if (degree > 9) throw ConfigError("build_space: degree > 9 unsupported");
    DgSpace space;
    space.mesh = &mesh;
    space.degree = degree;
    space.n_loc = (degree + 1) * (degree + 2) / 2;
    const int n_cells = mesh.n_cells();
    space.offsets.resize(n_cells);
    for (int c = 0; c < n_cells; ++c) space.offsets[c] = c * space.n_loc;
    space.n_dofs = n_cells * space.n_loc;

    space.cell_basis.resize(n_cells);
    space.quad.resize(n_cells);
    space.quad_cubic.resize(n_cells);
    space.values.resize(n_cells);
    space.values_cubic.resize(n_cells);

    const int deg_bilinear = 2 * degree + 2;
    const int deg_cubic = 3 * degree + 1;
    const int n = space.n_loc;

    auto build_cell = [&](int c) {
        const Cell& cell = mesh.cells[c];
        CellBasis& cb = space.cell_basis[c];

        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (int v : cell.vertex_ids) {
            const Point2 p = mesh.vertices[v];
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        cb.center = {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
        cb.inv_hx = 2.0 / (xmax - xmin);
        cb.inv_hy = 2.0 / (ymax - ymin);

        space.quad[c] = triangle_fan_quadrature(cell.sub_triangles, deg_bilinear);
        space.quad_cubic[c] = triangle_fan_quadrature(cell.sub_triangles, deg_cubic);

        // Monomial values at the bilinear-rule points drive the orthonormalization.
        const CellQuadrature& q = space.quad[c];
        const std::size_t nq = q.points.size();
        std::vector<double> mono(nq * n);
        for (std::size_t k = 0; k < nq; ++k) {
            const double X = (q.points[k].x - cb.center.x) * cb.inv_hx;
            const double Y = (q.points[k].y - cb.center.y) * cb.inv_hy;
            scaled_monomials(degree, X, Y, &mono[k * n]);
        }

        // Orthonormalize twice: Gram -> Cholesky -> C <- L^{-1} C.
        cb.coeff.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) cb.coeff[i * n + i] = 1.0;
        std::vector<double> vals(nq * n), gram(static_cast<std::size_t>(n) * n);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < nq; ++k) {
                const double* m = &mono[k * n];
                double* v = &vals[k * n];
                for (int i = 0; i < n; ++i) {
                    double s = 0.0;
                    const double* row = &cb.coeff[i * n];
                    for (int j = 0; j <= i; ++j) s += row[j] * m[j];
                    v[i] = s;
                }
            }
            std::fill(gram.begin(), gram.end(), 0.0);
            for (std::size_t k = 0; k < nq; ++k) {
                const double w = q.weights[k];
                const double* v = &vals[k * n];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j <= i; ++j) gram[i * n + j] += w * v[i] * v[j];
            }
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) gram[i * n + j] = gram[j * n + i];
            if (!cholesky(gram, n))
                throw NumericError("build_space: singular Gram matrix on cell " +
                                   std::to_string(c) + " (degenerate geometry)");
            apply_inverse_lower(gram, cb.coeff, n);
        }

        auto cache_values = [&](const CellQuadrature& cq, std::vector<double>& store) {
            const std::size_t m = cq.points.size();
            store.resize(m * n);
            std::vector<double> mono_pt(n);
            for (std::size_t k = 0; k < m; ++k) {
                const double X = (cq.points[k].x - cb.center.x) * cb.inv_hx;
                const double Y = (cq.points[k].y - cb.center.y) * cb.inv_hy;
                scaled_monomials(degree, X, Y, mono_pt.data());
                double* v = &store[k * n];
                for (int i = 0; i < n; ++i) {
                    double s = 0.0;
                    const double* row = &cb.coeff[i * n];
                    for (int j = 0; j <= i; ++j) s += row[j] * mono_pt[j];
                    v[i] = s;
                }
            }
        };
        cache_values(space.quad[c], space.values[c]);
        cache_values(space.quad_cubic[c], space.values_cubic[c]);
    };

    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (int c = 0; c < n_cells; ++c) build_cell(c);
    } else {
        for (int c = 0; c < n_cells; ++c) build_cell(c);
    }
    return space;
}

void evaluate_basis(const DgSpace& space, int cell, Point2 p, double* values, double* grad_x,
                    double* grad_y) {
    const CellBasis& cb = space.cell_basis[cell];
    const int n = space.n_loc;
    const double X = (p.x - cb.center.x) * cb.inv_hx;
    const double Y = (p.y - cb.center.y) * cb.inv_hy;

    double mono[66]; // enough for p <= 9
    scaled_monomials(space.degree, X, Y, mono);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = &cb.coeff[i * n];
        for (int j = 0; j <= i; ++j) s += row[j] * mono[j];
        values[i] = s;
    }
    if (grad_x && grad_y) {
        double mgx[66], mgy[66];
        scaled_monomial_gradients(space.degree, X, Y, cb.inv_hx, cb.inv_hy, mgx, mgy);
        for (int i = 0; i < n; ++i) {
            double sx = 0.0, sy = 0.0;
            const double* row = &cb.coeff[i * n];
            for (int j = 0; j <= i; ++j) {
                sx += row[j] * mgx[j];
                sy += row[j] * mgy[j];
            }
            grad_x[i] = sx;
            grad_y[i] = sy;
        }
    }
}

std::vector<double> project(const DgSpace& space, const std::function<double(Point2)>& f,
                            Exec exec) {
    std::vector<double> coeffs(space.n_dofs, 0.0);
    const int n = space.n_loc;
    const int n_cells = space.mesh->n_cells();
    auto project_cell = [&](int c) {
        const CellQuadrature& q = space.quad[c];
        const std::vector<double>& vals = space.values[c];
        double* out = &coeffs[space.offsets[c]];
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const double wf = q.weights[k] * f(q.points[k]);
            const double* v = &vals[k * n];
            for (int i = 0; i < n; ++i) out[i] += wf * v[i];
        }
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int c = 0; c < n_cells; ++c) project_cell(c);
    } else {
        for (int c = 0; c < n_cells; ++c) project_cell(c);
    }
    return coeffs;
}

double evaluate_field(const DgSpace& space, int cell, Point2 p, std::span<const double> coeffs) {
    double vals[66];
    evaluate_basis(space, cell, p, vals);
    const double* c = &coeffs[space.offsets[cell]];
    double s = 0.0;
    for (int i = 0; i < space.n_loc; ++i) s += c[i] * vals[i];
    return s;
}

std::vector<double> cell_gram(const DgSpace& space, int cell) {
    const int n = space.n_loc;
    const CellQuadrature& q = space.quad[cell];
    const std::vector<double>& vals = space.values[cell];
    std::vector<double> gram(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t k = 0; k < q.points.size(); ++k) {
        const double w = q.weights[k];
        const double* v = &vals[k * n];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gram[i * n + j] += w * v[i] * v[j];
    }
    return gram;
}

} // namespace polywave
