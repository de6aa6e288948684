#include "rdaocp/sparse_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace rdaocp {

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols,
                           const std::vector<Triplet>& entries) {
  SparseMatrix a(rows, cols);
  a.setFromTriplets(entries.begin(), entries.end());
  finalize(a);
  return a;
}

void finalize(SparseMatrix& a) {
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      if (!std::isfinite(it.value())) throw SolverError("sparse matrix contains non-finite entries");
  a.prune(0.0, 0.0);
  a.makeCompressed();
}

double symmetry_defect(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("symmetry_defect: matrix is not square");
  const SparseMatrix at = a.transpose();
  const SparseMatrix diff = a - at;
  double scale = 0.0;
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  if (scale == 0.0) return 0.0;
  double defect = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
      defect = std::max(defect, std::abs(it.value()));
  return defect / scale;
}

SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: shape mismatch");
  SparseMatrix c = (a * b).pruned(0.0, 0.0);
  c.makeCompressed();
  return c;
}

SparseMatrix transpose_matmul(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("transpose_matmul: shape mismatch");
  const SparseMatrix at = a.transpose();
  return matmul(at, b);
}

SparseMatrix triple_product(const SparseMatrix& r, const SparseMatrix& a) {
  if (a.rows() != a.cols() || a.cols() != r.rows())
    throw InvalidArgument("triple_product: shape mismatch");
  const SparseMatrix ar = matmul(a, r);
  SparseMatrix c = transpose_matmul(r, ar);
  if (symmetry_defect(a) == 0.0) {
    // the two products round differently; restore exact symmetry
    const SparseMatrix ct = c.transpose();
    c = 0.5 * (c + ct);
    c.makeCompressed();
  }
  return c;
}

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct SpdSolver::Impl {
  ColMatrix a;
  Eigen::SimplicialLLT<ColMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
  Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
};

SpdSolver::SpdSolver(const SparseMatrix& a, const SolveOptions& options)
    : a_(a), options_(options), impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw InvalidArgument("spd_solve: matrix is not square");
  const double defect = symmetry_defect(a);
  if (defect > options.symmetry_tolerance) {
    std::ostringstream msg;
    msg << "spd_solve: matrix is not symmetric (relative defect " << defect << ")";
    throw SolverError(msg.str());
  }
  impl_->a = a;
  if (options.method == SolveMethod::Direct) {
    impl_->llt.compute(impl_->a);
    if (impl_->llt.info() != Eigen::Success) {
      const auto d = impl_->a.diagonal();
      std::ostringstream msg;
      msg << "spd_solve: Cholesky factorisation met a non-positive pivot (matrix of size "
          << a.rows() << ", diagonal range [" << d.minCoeff() << ", " << d.maxCoeff()
          << "]); the matrix is not positive definite - the penalty parameter is likely too small";
      throw SolverError(msg.str());
    }
  } else {
    impl_->cg.setTolerance(options.tolerance);
    impl_->cg.setMaxIterations(options.max_iterations);
    impl_->cg.compute(impl_->a);
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

Vector SpdSolver::solve(const Vector& b, SolveStats* stats) const {
  if (b.size() != a_.rows()) throw InvalidArgument("spd_solve: right-hand side size mismatch");
  SolveStats local;
  local.method = options_.method;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    if (stats) *stats = local;
    return Vector::Zero(b.size());
  }

  Vector x;
  if (options_.method == SolveMethod::Direct) {
    x = impl_->llt.solve(b);
    local.factor_nonzeros = impl_->llt.matrixL().nestedExpression().nonZeros();
    Vector r = b - impl_->a * x;
    // iterative refinement when rounding leaves the residual above tolerance
    for (int step = 0; step < 3 && r.norm() > options_.tolerance * bnorm; ++step) {
      x += impl_->llt.solve(r);
      r = b - impl_->a * x;
      ++local.iterations;
    }
    local.relative_residual = r.norm() / bnorm;
  } else {
    x = impl_->cg.solve(b);
    local.iterations = static_cast<int>(impl_->cg.iterations());
    const Vector r = b - impl_->a * x;
    local.relative_residual = r.norm() / bnorm;
    if (impl_->cg.info() != Eigen::Success && local.relative_residual > options_.tolerance) {
      std::ostringstream msg;
      msg << "spd_solve: conjugate gradient did not converge (" << local.iterations
          << " iterations, relative residual " << local.relative_residual
          << "); the matrix may be indefinite";
      throw SolverError(msg.str());
    }
  }
  if (!x.allFinite()) throw SolverError("spd_solve: solution is not finite");
  const double limit = options_.method == SolveMethod::Direct
                          ? std::max(options_.tolerance, options_.failure_tolerance)
                          : options_.tolerance;
  if (local.relative_residual > limit) {
    std::ostringstream msg;
    msg << "spd_solve: relative residual " << local.relative_residual << " exceeds tolerance "
        << limit;
    throw SolverError(msg.str());
  }
  if (stats) *stats = local;
  return x;
}

Vector spd_solve(const SparseMatrix& a, const Vector& b, const SolveOptions& options,
                 SolveStats* stats) {
  return SpdSolver(a, options).solve(b, stats);
}

}  // namespace rdaocp
