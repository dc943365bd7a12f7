#pragma once

#include <span>
#include <vector>

#include "polywave/basis.hpp"

namespace polywave {

/// Compressed sparse row matrix with sorted, unique column indices per row.
struct CsrMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_offsets; // n_rows + 1
    std::vector<int> cols;
    std::vector<double> vals;

    /// Index into vals for entry (r,c); -1 if not in the pattern.
    int find(int r, int c) const;
    double& at(int r, int c); // throws when outside the pattern
};

CsrMatrix transpose(const CsrMatrix& a);

/// y = A x. The parallel path splits rows across threads; per-row dot
/// products are sequential either way, so results are bitwise identical.
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
          Exec exec = Exec::parallel);

/// alpha*A + beta*B on the union pattern.
CsrMatrix add_scaled(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta);

/// Uniform-block-size block-diagonal matrix (DG cell blocks).
struct BlockDiagMatrix {
    int block_size = 0;
    int n_blocks = 0;
    std::vector<double> blocks; // n_blocks * block_size^2, row-major per block

    int rows() const { return block_size * n_blocks; }
    double* block(int b) { return &blocks[static_cast<std::size_t>(b) * block_size * block_size]; }
    const double* block(int b) const {
        return &blocks[static_cast<std::size_t>(b) * block_size * block_size];
    }
    static BlockDiagMatrix zero(int n_blocks, int block_size);
    static BlockDiagMatrix identity(int n_blocks, int block_size);
};

void block_diag_matvec(const BlockDiagMatrix& m, std::span<const double> x, std::span<double> y,
                       Exec exec = Exec::parallel);

/// x = M^{-1} rhs by per-block Cholesky. Throws NumericError on an
/// indefinite block (degenerate effective mass).
std::vector<double> solve_block_diag(const BlockDiagMatrix& m, std::span<const double> rhs);

/// Cell-block Jacobi preconditioner: factored diagonal blocks of a CSR matrix.
struct BlockJacobi {
    int block_size = 0;
    int n_blocks = 0;
    std::vector<double> factors; // Cholesky factors, packed like BlockDiagMatrix

    static BlockJacobi build(const CsrMatrix& a, int block_size);
    void apply(std::span<const double> r, std::span<double> z) const;
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0; // final ||Ax - b||_2 / ||b||_2
};

/// Preconditioned conjugate gradients for SPD systems.
/// Guarantees ||Ax - b|| <= tol * ||b|| on return; throws NumericError on
/// non-convergence (carrying the final residual) or detected indefiniteness.
/// `x` doubles as the starting guess when warm_start is set.
SolveReport solve_spd(const CsrMatrix& a, std::span<const double> rhs, std::span<double> x,
                      const BlockJacobi& precond, double tol = 1e-12, int max_iter = -1,
                      Exec exec = Exec::parallel, bool warm_start = false);

} // namespace polywave
