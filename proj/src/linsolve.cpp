#include "mmdlab/linsolve.hpp"

#include <cmath>

#include "mmdlab/errors.hpp"

namespace mmdlab {

SpdSolver::SpdSolver(Eigen::SparseMatrix<double> a, int space_vertices,
                     const SolverOptions& opts)
    : a_(std::move(a)), opts_(opts) {
  a_.makeCompressed();
  direct_ = !opts_.force_cg && space_vertices <= opts_.direct_vertex_limit;
  if (direct_) {
    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    ldlt_->compute(a_);
    if (ldlt_->info() != Eigen::Success)
      throw SolverError("sparse factorization failed (matrix not SPD?)");
  } else {
    inv_diag_ = a_.diagonal();
    for (Eigen::Index i = 0; i < inv_diag_.size(); ++i) {
      if (!(inv_diag_[i] > 0)) throw SolverError("nonpositive diagonal in CG preconditioner");
      inv_diag_[i] = 1.0 / inv_diag_[i];
    }
  }
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b, SolveStats* stats) const {
  const double bnorm = b.norm();
  if (direct_) {
    Eigen::VectorXd x = ldlt_->solve(b);
    if (ldlt_->info() != Eigen::Success) throw SolverError("direct solve failed");
    if (stats) {
      stats->method = "direct";
      stats->iterations = 0;
      stats->tolerance = 0;
      stats->residual = bnorm > 0 ? (a_ * x - b).norm() / bnorm : 0.0;
    }
    return x;
  }

  const auto n = a_.rows();
  const std::int64_t max_iter = opts_.max_iter > 0 ? opts_.max_iter : 10 * n;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (bnorm == 0) {
    if (stats) *stats = {"conjugate-gradient", 0, opts_.tol, 0.0};
    return x;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag_.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  std::int64_t it = 0;
  double rnorm = r.norm();
  while (rnorm > opts_.tol * bnorm && it < max_iter) {
    const Eigen::VectorXd ap = a_ * p;
    const double alpha = rz / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    z = inv_diag_.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
    rnorm = r.norm();
    ++it;
  }
  if (rnorm > opts_.tol * bnorm)
    throw SolverError("conjugate gradient did not converge: residual " +
                      std::to_string(rnorm / bnorm) + " after " +
                      std::to_string(it) + " iterations");
  if (stats) *stats = {"conjugate-gradient", it, opts_.tol, rnorm / bnorm};
  return x;
}

}  // namespace mmdlab
