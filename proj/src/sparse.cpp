#include "polywave/sparse.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "polywave/errors.hpp"

namespace polywave {

int CsrMatrix::find(int r, int c) const {
    const int lo = row_offsets[r], hi = row_offsets[r + 1];
    auto it = std::lower_bound(cols.begin() + lo, cols.begin() + hi, c);
    if (it == cols.begin() + hi || *it != c) return -1;
    return static_cast<int>(it - cols.begin());
}

double& CsrMatrix::at(int r, int c) {
    const int idx = find(r, c);
    if (idx < 0) throw NumericError("CsrMatrix::at outside pattern");
    return vals[idx];
}

CsrMatrix transpose(const CsrMatrix& a) {
    CsrMatrix t;
    t.n_rows = a.n_cols;
    t.n_cols = a.n_rows;
    t.row_offsets.assign(t.n_rows + 1, 0);
    for (int c : a.cols) t.row_offsets[c + 1]++;
    for (int r = 0; r < t.n_rows; ++r) t.row_offsets[r + 1] += t.row_offsets[r];
    t.cols.resize(a.cols.size());
    t.vals.resize(a.vals.size());
    std::vector<int> cursor(t.row_offsets.begin(), t.row_offsets.end() - 1);
    for (int r = 0; r < a.n_rows; ++r)
        for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
            const int pos = cursor[a.cols[k]]++;
            t.cols[pos] = r;
            t.vals[pos] = a.vals[k];
        }
    return t;
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y, Exec exec) {
    if (static_cast<int>(x.size()) != a.n_cols || static_cast<int>(y.size()) != a.n_rows)
        throw NumericError("spmv: dimension mismatch");
    auto row = [&](int r) {
        double s = 0.0;
        for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) s += a.vals[k] * x[a.cols[k]];
        y[r] = s;
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int r = 0; r < a.n_rows; ++r) row(r);
    } else {
        for (int r = 0; r < a.n_rows; ++r) row(r);
    }
}

CsrMatrix add_scaled(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta) {
    if (a.n_rows != b.n_rows || a.n_cols != b.n_cols)
        throw NumericError("add_scaled: dimension mismatch");
    CsrMatrix r;
    r.n_rows = a.n_rows;
    r.n_cols = a.n_cols;
    r.row_offsets.assign(a.n_rows + 1, 0);
    r.cols.reserve(a.cols.size() + b.cols.size());
    r.vals.reserve(a.cols.size() + b.cols.size());
    for (int row = 0; row < a.n_rows; ++row) {
        int ia = a.row_offsets[row], ea = a.row_offsets[row + 1];
        int ib = b.row_offsets[row], eb = b.row_offsets[row + 1];
        while (ia < ea || ib < eb) {
            int ca = ia < ea ? a.cols[ia] : INT_MAX;
            int cb = ib < eb ? b.cols[ib] : INT_MAX;
            if (ca == cb) {
                r.cols.push_back(ca);
                r.vals.push_back(alpha * a.vals[ia++] + beta * b.vals[ib++]);
            } else if (ca < cb) {
                r.cols.push_back(ca);
                r.vals.push_back(alpha * a.vals[ia++]);
            } else {
                r.cols.push_back(cb);
                r.vals.push_back(beta * b.vals[ib++]);
            }
        }
        r.row_offsets[row + 1] = static_cast<int>(r.cols.size());
    }
    return r;
}

BlockDiagMatrix BlockDiagMatrix::zero(int n_blocks, int block_size) {
    BlockDiagMatrix m;
    m.block_size = block_size;
    m.n_blocks = n_blocks;
    m.blocks.assign(static_cast<std::size_t>(n_blocks) * block_size * block_size, 0.0);
    return m;
}

BlockDiagMatrix BlockDiagMatrix::identity(int n_blocks, int block_size) {
    BlockDiagMatrix m = zero(n_blocks, block_size);
    for (int b = 0; b < n_blocks; ++b)
        for (int i = 0; i < block_size; ++i) m.block(b)[i * block_size + i] = 1.0;
    return m;
}

void block_diag_matvec(const BlockDiagMatrix& m, std::span<const double> x, std::span<double> y,
                       Exec exec) {
    if (static_cast<int>(x.size()) != m.rows() || static_cast<int>(y.size()) != m.rows())
        throw NumericError("block_diag_matvec: dimension mismatch");
    const int n = m.block_size;
    auto one = [&](int b) {
        const double* blk = m.block(b);
        const double* xb = &x[static_cast<std::size_t>(b) * n];
        double* yb = &y[static_cast<std::size_t>(b) * n];
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += blk[i * n + j] * xb[j];
            yb[i] = s;
        }
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int b = 0; b < m.n_blocks; ++b) one(b);
    } else {
        for (int b = 0; b < m.n_blocks; ++b) one(b);
    }
}

namespace {

bool cholesky_inplace(double* a, int n) {
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
    }
    return true;
}

void cholesky_solve(const double* L, int n, const double* b, double* x) {
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= L[i * n + k] * x[k];
        x[i] = s / L[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < n; ++k) s -= L[k * n + i] * x[k];
        x[i] = s / L[i * n + i];
    }
}

} // namespace

std::vector<double> solve_block_diag(const BlockDiagMatrix& m, std::span<const double> rhs) {
    if (static_cast<int>(rhs.size()) != m.rows())
        throw NumericError("solve_block_diag: dimension mismatch");
    const int n = m.block_size;
    std::vector<double> x(rhs.size());
    std::vector<double> fac(static_cast<std::size_t>(n) * n);
    for (int b = 0; b < m.n_blocks; ++b) {
        std::copy_n(m.block(b), n * n, fac.data());
        if (!cholesky_inplace(fac.data(), n))
            throw NumericError("solve_block_diag: indefinite block " + std::to_string(b) +
                               " (degenerate effective mass)");
        cholesky_solve(fac.data(), n, &rhs[static_cast<std::size_t>(b) * n],
                       &x[static_cast<std::size_t>(b) * n]);
    }
    return x;
}

BlockJacobi BlockJacobi::build(const CsrMatrix& a, int block_size) {
    if (a.n_rows != a.n_cols || a.n_rows % block_size != 0)
        throw NumericError("BlockJacobi: dimensions not a multiple of block size");
    BlockJacobi p;
    p.block_size = block_size;
    p.n_blocks = a.n_rows / block_size;
    p.factors.assign(static_cast<std::size_t>(p.n_blocks) * block_size * block_size, 0.0);
    for (int b = 0; b < p.n_blocks; ++b) {
        double* blk = &p.factors[static_cast<std::size_t>(b) * block_size * block_size];
        const int base = b * block_size;
        for (int i = 0; i < block_size; ++i) {
            const int r = base + i;
            for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
                const int c = a.cols[k] - base;
                if (c >= 0 && c < block_size) blk[i * block_size + c] = a.vals[k];
            }
        }
        if (!cholesky_inplace(blk, block_size))
            throw NumericError("BlockJacobi: indefinite diagonal block " + std::to_string(b));
    }
    return p;
}

void BlockJacobi::apply(std::span<const double> r, std::span<double> z) const {
    const int n = block_size;
    for (int b = 0; b < n_blocks; ++b)
        cholesky_solve(&factors[static_cast<std::size_t>(b) * n * n], n,
                       &r[static_cast<std::size_t>(b) * n], &z[static_cast<std::size_t>(b) * n]);
}

SolveReport solve_spd(const CsrMatrix& a, std::span<const double> rhs, std::span<double> x,
                      const BlockJacobi& precond, double tol, int max_iter, Exec exec,
                      bool warm_start) {
    const int n = a.n_rows;
    if (a.n_cols != n || static_cast<int>(rhs.size()) != n || static_cast<int>(x.size()) != n)
        throw NumericError("solve_spd: dimension mismatch");
    if (max_iter < 0) max_iter = 10 * n;

    auto dot = [](std::span<const double> u, std::span<const double> v) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
        return s;
    };

    const double bnorm = std::sqrt(dot(rhs, rhs));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return {0, 0.0};
    }

    std::vector<double> r(n), z(n), p(n), q(n);
    if (warm_start) {
        spmv(a, x, r, exec);
        for (int i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
        if (std::sqrt(dot(r, r)) <= tol * bnorm) return {0, std::sqrt(dot(r, r)) / bnorm};
    } else {
        std::fill(x.begin(), x.end(), 0.0);
        std::copy(rhs.begin(), rhs.end(), r.begin());
    }
    precond.apply(r, z);
    p = z;
    double rz = dot(r, z);
    double rnorm = bnorm;

    for (int it = 1; it <= max_iter; ++it) {
        spmv(a, p, q, exec);
        const double pq = dot(p, q);
        if (!(pq > 0.0))
            throw NumericError("solve_spd: matrix not positive definite (p'Ap <= 0)");
        const double alpha = rz / pq;
        for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * q[i];
        rnorm = std::sqrt(dot(r, r));
        if (rnorm <= tol * bnorm) return {it, rnorm / bnorm};
        precond.apply(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw NumericError("solve_spd: no convergence in " + std::to_string(max_iter) +
                       " iterations (residual " + std::to_string(rnorm / bnorm) + ")");
}

} // namespace polywave
