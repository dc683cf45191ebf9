#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

namespace semifrac {

/// Compressed-row sparse matrix; row pointers / column indices / values are
/// exposed by outerIndexPtr() / innerIndexPtr() / valuePtr().
using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Preconditioner { None, Jacobi };

struct CgConfig {
    double rel_tol = 1e-10;
    int max_iter = -1;  // -1: 10 * n
    Preconditioner precond = Preconditioner::None;
    // Observation hook for instrumented runs (iterate index, current x).
    std::function<void(int, const Eigen::VectorXd&)> on_iterate;
};

struct CgResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double residual = 0.0;  // final |b - Ax| / |b|
};

Eigen::VectorXd spmv(const CsrMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Preconditioned conjugate gradients for SPD systems. Terminates when the
/// true residual satisfies |b - Ax| <= rel_tol * |b|; throws on breakdown or
/// when the iteration cap is exhausted. An optional x0 warm-starts the solve.
CgResult cg_solve(const CsrMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& b,
                  const CgConfig& config = {},
                  const Eigen::VectorXd& x0 = Eigen::VectorXd());

}  // namespace semifrac
