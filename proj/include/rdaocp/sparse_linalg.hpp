#pragma once

#include <memory>
#include <string>

#include <Eigen/Sparse>

#include "rdaocp/common.hpp"

namespace rdaocp {

/// Compressed-row sparse matrix with sorted, duplicate-free column indices.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const std::vector<Triplet>& entries);

/// Removes explicit zeros and checks that every entry is finite.
void finalize(SparseMatrix& a);

/// max |A - A^T| / max |A| (0 for the zero matrix).
double symmetry_defect(const SparseMatrix& a);

SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b);
/// A^T * B.
SparseMatrix transpose_matmul(const SparseMatrix& a, const SparseMatrix& b);
/// R^T * A * R, symmetrised when A is symmetric.
SparseMatrix triple_product(const SparseMatrix& r, const SparseMatrix& a);

enum class SolveMethod { Direct, Iterative };

struct SolveStats {
  SolveMethod method = SolveMethod::Direct;
  int iterations = 0;
  double relative_residual = 0.0;
  Eigen::Index factor_nonzeros = 0;  // nonzeros of the Cholesky factor (direct only)
};

struct SolveOptions {
  SolveMethod method = SolveMethod::Direct;
  double tolerance = 1e-12;          // target relative residual (refinement / CG)
  double failure_tolerance = 1e-8;   // direct solves above this residual are rejected
  double symmetry_tolerance = 1e-10;
  int max_iterations = 20000;
};

/// Symmetric positive definite solver. The factorisation is computed once and reused
/// for every right-hand side; solve() is const and may be called concurrently.
class SpdSolver {
 public:
  SpdSolver(const SparseMatrix& a, const SolveOptions& options = {});
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  Vector solve(const Vector& b, SolveStats* stats = nullptr) const;

  [[nodiscard]] const SparseMatrix& matrix() const { return a_; }
  [[nodiscard]] const SolveOptions& options() const { return options_; }

 private:
  struct Impl;
  SparseMatrix a_;
  SolveOptions options_;
  std::unique_ptr<Impl> impl_;
};

/// One-shot solve of A x = b.
Vector spd_solve(const SparseMatrix& a, const Vector& b, const SolveOptions& options = {},
                 SolveStats* stats = nullptr);

}  // namespace rdaocp
