#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cstdint>
#include <memory>
#include <string>

namespace mmdlab {

struct SolverOptions {
  double tol = 1e-10;             // relative residual for the iterative path
  std::int64_t max_iter = -1;     // default 10 * n
  int direct_vertex_limit = 20000;  // spaces above this size use CG
  bool force_cg = false;
};

struct SolveStats {
  std::string method = "direct";  // "direct" or "conjugate-gradient"
  std::int64_t iterations = 0;
  double tolerance = 0;
  double residual = 0;  // relative residual of the final solution
};

/// Factorization of a sparse SPD system, reusable across right-hand sides.
/// Small systems go through a sparse LDLT, large ones through Jacobi
/// preconditioned conjugate gradient.
class SpdSolver {
 public:
  /// `space_vertices` selects the method per the configured limit.
  SpdSolver(Eigen::SparseMatrix<double> a, int space_vertices,
            const SolverOptions& opts = {});

  Eigen::VectorXd solve(const Eigen::VectorXd& b, SolveStats* stats = nullptr) const;
  bool direct() const { return direct_; }
  Eigen::Index size() const { return a_.rows(); }

 private:
  Eigen::SparseMatrix<double> a_;
  SolverOptions opts_;
  bool direct_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
  Eigen::VectorXd inv_diag_;
};

}  // namespace mmdlab
