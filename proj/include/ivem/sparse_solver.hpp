#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace ivem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// LU factorization of a square sparse matrix with UMFPACK. Owns the
/// symbolic and numeric objects; solves with A or its transpose.
class UmfpackLU {
 public:
  explicit UmfpackLU(const SparseMatrix& A);
  ~UmfpackLU();
  UmfpackLU(const UmfpackLU&) = delete;
  UmfpackLU& operator=(const UmfpackLU&) = delete;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& b) const;
  /// UMFPACK's reciprocal condition estimate (min/max |diag U|).
  double rcond() const { return rcond_; }

 private:
  Eigen::VectorXd run(int sys, const Eigen::VectorXd& b) const;

  SparseMatrix A_;
  void* numeric_ = nullptr;
  double rcond_ = 0.0;
};

double one_norm(const SparseMatrix& A);

/// Hager-Higham estimate of the 1-norm condition number ‖A‖₁‖A⁻¹‖₁.
double condest_1norm(const SparseMatrix& A, const UmfpackLU& lu);

struct LinearSolveResult {
  Eigen::VectorXd x;
  double residual = 0.0;  // ‖Ax - b‖ / ‖b‖ (absolute when b = 0)
  int refinement_steps = 0;
  double rcond = 0.0;
  double cond_estimate = 0.0;
  double factor_ms = 0.0;
};

/// Direct solve with one step of iterative refinement when the relative
/// residual exceeds 1e-10. Throws SolveError when it stays above 1e-8.
LinearSolveResult solve_sparse(const SparseMatrix& A, const Eigen::VectorXd& b,
                               bool estimate_condition = true);

}  // namespace ivem
