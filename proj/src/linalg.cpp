#include "semifrac/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace semifrac {

Eigen::VectorXd spmv(const CsrMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (A.cols() != x.size())
        throw std::invalid_argument("spmv: dimension mismatch");
    const int n = static_cast<int>(A.rows());
    Eigen::VectorXd y(n);
    const auto* rowptr = A.outerIndexPtr();
    const auto* col = A.innerIndexPtr();
    const double* val = A.valuePtr();
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (auto k = rowptr[i]; k < rowptr[i + 1]; ++k) acc += val[k] * x[col[k]];
        y[i] = acc;
    }
    return y;
}

CgResult cg_solve(const CsrMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& b,
                  const CgConfig& config, const Eigen::VectorXd& x0) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || b.size() != n)
        throw std::invalid_argument("cg_solve: dimension mismatch");
    const int max_iter = config.max_iter > 0 ? config.max_iter : 10 * n;

    const double norm_b = b.norm();
    CgResult out;
    if (x0.size() == 0) {
        out.x = Eigen::VectorXd::Zero(n);
    } else if (x0.size() == n) {
        out.x = x0;
    } else {
        throw std::invalid_argument("cg_solve: x0 dimension mismatch");
    }
    if (norm_b == 0.0) {
        out.x.setZero();
        return out;
    }

    Eigen::VectorXd inv_diag;
    if (config.precond == Preconditioner::Jacobi) {
        inv_diag.resize(n);
        for (int i = 0; i < n; ++i) {
            const double d = A.coeff(i, i);
            if (!(d > 0.0))
                throw std::runtime_error("cg_solve: Jacobi needs a positive diagonal");
            inv_diag[i] = 1.0 / d;
        }
    }
    auto precond = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        if (config.precond == Preconditioner::Jacobi)
            return inv_diag.asDiagonal() * v;
        return v;
    };

    Eigen::VectorXd r = b - spmv(A, out.x);
    Eigen::VectorXd z = precond(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const double tol_abs = config.rel_tol * norm_b;

    for (int it = 0; it < max_iter; ++it) {
        if (r.norm() <= tol_abs) {
            // Recurrence residual can drift from the true one; confirm.
            r = b - spmv(A, out.x);
            if (r.norm() <= tol_abs) {
                out.iterations = it;
                out.residual = r.norm() / norm_b;
                return out;
            }
            z = precond(r);
            p = z;
            rz = r.dot(z);
        }
        const Eigen::VectorXd Ap = spmv(A, p);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0))
            throw std::runtime_error("cg_solve: breakdown, operator not SPD");
        const double alpha = rz / pAp;
        out.x += alpha * p;
        r -= alpha * Ap;
        z = precond(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
        if (config.on_iterate) config.on_iterate(it + 1, out.x);
    }

    Eigen::VectorXd true_r = b - spmv(A, out.x);
    if (true_r.norm() <= tol_abs) {
        out.iterations = max_iter;
        out.residual = true_r.norm() / norm_b;
        return out;
    }
    throw std::runtime_error("cg_solve: no convergence within iteration cap");
}

}  // namespace semifrac
