#pragma once

// Symmetric sparse linear solves behind one call: direct LDLT factorization
// up to a configurable problem size, diagonally preconditioned conjugate
// gradients above it. The contract is only that the returned solution meets
// the requested relative residual; callers must not rely on the method.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "cerebra/core.hpp"

namespace cerebra {

using SpMat = Eigen::SparseMatrix<double>;

struct LinearSolveInfo {
  double rel_residual = 0.0;
  bool used_diagonal_shift = false;  // fell back to a shifted (regularized) matrix
};

// Solves A x = b for symmetric A. If the factorization breaks down (A not
// positive definite), retries with growing diagonal shifts; the result is
// then a modified-Newton direction rather than the exact solution, which the
// nonlinear callers accept because they globalize with a line search.
inline Eigen::VectorXd solve_symmetric(const SpMat& A, const Eigen::VectorXd& b, double rel_tol,
                                       int direct_dof_limit, LinearSolveInfo* info = nullptr) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    if (info) *info = {};
    return Eigen::VectorXd::Zero(b.size());
  }

  auto finish = [&](const Eigen::VectorXd& x, bool shifted) {
    if (info) {
      info->rel_residual = (A * x - b).norm() / bnorm;
      info->used_diagonal_shift = shifted;
    }
    return x;
  };

  if (A.rows() <= direct_dof_limit) {
    Eigen::SimplicialLDLT<SpMat> ldlt;
    ldlt.compute(A);
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd x = ldlt.solve(b);
      const double rel = (A * x - b).norm() / bnorm;
      if (rel <= std::max(rel_tol, 1e-9)) return finish(x, false);
    }
    // Shift retry: scale from the largest diagonal magnitude.
    double diag_max = 0.0;
    for (int i = 0; i < A.rows(); ++i) diag_max = std::max(diag_max, std::abs(A.coeff(i, i)));
    double shift = (diag_max > 0 ? diag_max : 1.0) * 1e-10;
    SpMat I(A.rows(), A.cols());
    I.setIdentity();
    for (int attempt = 0; attempt < 30; ++attempt, shift *= 10.0) {
      SpMat As = A + shift * I;
      ldlt.compute(As);
      if (ldlt.info() != Eigen::Success) continue;
      Eigen::VectorXd x = ldlt.solve(b);
      if (x.allFinite()) return finish(x, true);
    }
    throw SolverError("direct factorization failed even with diagonal shifts");
  }

  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(rel_tol);
  cg.setMaxIterations(10L * A.rows());
  cg.compute(A);
  Eigen::VectorXd x = cg.solve(b);
  if (cg.info() != Eigen::Success && (A * x - b).norm() / bnorm > std::max(rel_tol * 10, 1e-8))
    throw SolverError("conjugate gradient stalled at relative residual " +
                      std::to_string((A * x - b).norm() / bnorm));
  return finish(x, false);
}

// Reusable solver for repeated right-hand sides against one SPD matrix
// (e.g. chord iterations with a frozen Jacobian). The matrix must outlive
// the solver.
class SymmetricSolver {
public:
  SymmetricSolver(const SpMat& A, double rel_tol, int direct_dof_limit)
      : A_(A), rel_tol_(rel_tol), direct_(A.rows() <= direct_dof_limit) {
    if (direct_) {
      ldlt_.compute(A_);
      direct_ = ldlt_.info() == Eigen::Success;
    }
    if (!direct_) {
      cg_.setTolerance(rel_tol_);
      cg_.setMaxIterations(10L * A_.rows());
      cg_.compute(A_);
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd x = direct_ ? ldlt_.solve(b).eval() : cg_.solve(b).eval();
    const double rel = (A_ * x - b).norm() / bnorm;
    if (rel > std::max(rel_tol_ * 10, 1e-8))
      throw SolverError("linear solve stalled at relative residual " + std::to_string(rel));
    return x;
  }

private:
  const SpMat& A_;
  double rel_tol_;
  bool direct_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>> cg_;
};

}  // namespace cerebra
