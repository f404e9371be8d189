#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "error.hpp"

namespace stagpoly {

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    double seconds = 0.0;
    std::string method;
    std::vector<double> residual_history; // ||r_i|| / ||b||, filled when requested
};

/// Solver failure that carries the report of the failed run.
class SolveError : public Error {
public:
    SolveError(ErrorKind kind, const std::string& what, SolveReport report)
        : Error(kind, what), report_(std::move(report))
    {}
    const SolveReport& report() const { return report_; }

private:
    SolveReport report_;
};

enum class Preconditioner { none, diagonal };

struct CgOptions {
    double tol = 1e-10;
    int maxit = -1; // -1: 10 sqrt(n) + 1000
    Preconditioner preconditioner = Preconditioner::diagonal;
    bool record_history = false;
    /// Called with (iteration, iterate) after every update; used by tests.
    std::function<void(int, const Eigen::VectorXd&)> observer;
};

struct SolveResult {
    Eigen::VectorXd x;
    SolveReport report;
};

inline int default_maxit(Eigen::Index n)
{
    return static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))) + 1000;
}

/// Preconditioned conjugate gradients for a symmetric positive definite matrix.
inline SolveResult solve_cg(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                            const CgOptions& options = {})
{
    const auto start = std::chrono::steady_clock::now();
    const Eigen::Index n = b.size();
    if (A.rows() != n || A.cols() != n) fail(ErrorKind::validation, "matrix and right-hand side sizes differ");
    SolveResult result;
    result.report.method = options.preconditioner == Preconditioner::diagonal ? "cg-jacobi" : "cg";
    result.x = Eigen::VectorXd::Zero(n);
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    const double bnorm = b.norm();
    if (n == 0 || bnorm == 0.0) {
        result.report.seconds = elapsed();
        return result;
    }
    Eigen::VectorXd inv_diag = Eigen::VectorXd::Ones(n);
    if (options.preconditioner == Preconditioner::diagonal) {
        const Eigen::VectorXd d = A.diagonal();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!(d[i] > 0.0)) {
                result.report.seconds = elapsed();
                throw SolveError(ErrorKind::not_spd, "non-positive diagonal entry " + std::to_string(i), result.report);
            }
            inv_diag[i] = 1.0 / d[i];
        }
    }
    const int maxit = options.maxit > 0 ? options.maxit : default_maxit(n);
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd q(n);
    double rz = r.dot(z);
    double rel = 1.0;
    if (options.record_history) result.report.residual_history.push_back(rel);
    int it = 0;
    while (it < maxit) {
        q.noalias() = A * p;
        const double pq = p.dot(q);
        if (!(pq > 0.0)) {
            result.report.iterations = it;
            result.report.relative_residual = rel;
            result.report.seconds = elapsed();
            throw SolveError(ErrorKind::not_spd, "p^T A p <= 0 at iteration " + std::to_string(it), result.report);
        }
        const double alpha = rz / pq;
        result.x.noalias() += alpha * p;
        r.noalias() -= alpha * q;
        ++it;
        rel = r.norm() / bnorm;
        if (options.record_history) result.report.residual_history.push_back(rel);
        if (options.observer) options.observer(it, result.x);
        if (rel <= options.tol) break;
        z = inv_diag.cwiseProduct(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    result.report.iterations = it;
    result.report.relative_residual = (b - A * result.x).norm() / bnorm;
    result.report.seconds = elapsed();
    if (rel > options.tol)
        throw SolveError(ErrorKind::non_convergence,
                         "CG did not reach tolerance in " + std::to_string(maxit) + " iterations", result.report);
    return result;
}

struct DirectOptions {
    Eigen::Index max_dim = 2000;
    double min_rcond = 1e-13;
};

/// Dense Cholesky solve for small systems.
inline SolveResult solve_direct(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                                const DirectOptions& options = {})
{
    const auto start = std::chrono::steady_clock::now();
    const Eigen::Index n = b.size();
    if (A.rows() != n || A.cols() != n) fail(ErrorKind::validation, "matrix and right-hand side sizes differ");
    if (n > options.max_dim)
        fail(ErrorKind::capability, "direct solve limited to " + std::to_string(options.max_dim) + " unknowns, got "
                                        + std::to_string(n));
    SolveResult result;
    result.report.method = "direct-cholesky";
    if (n == 0) {
        result.x.resize(0);
        return result;
    }
    const Eigen::MatrixXd dense(A);
    const Eigen::LLT<Eigen::MatrixXd> llt(dense);
    if (llt.info() != Eigen::Success || !(llt.rcond() >= options.min_rcond))
        throw SolveError(ErrorKind::singular, "matrix is numerically singular", result.report);
    result.x = llt.solve(b);
    const double bnorm = b.norm();
    result.report.relative_residual = bnorm > 0.0 ? (b - A * result.x).norm() / bnorm : 0.0;
    result.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace stagpoly
