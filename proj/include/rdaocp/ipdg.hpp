#pragma once

#include <functional>
#include <memory>
#include <span>

#include "rdaocp/reconstruction.hpp"
#include "rdaocp/sparse_linalg.hpp"

namespace rdaocp {

using ScalarFn = std::function<double(const Point&)>;
using GradientFn = std::function<Point(const Point&)>;
using MatrixFn = std::function<Eigen::Matrix2d(const Point&)>;

/// Partial derivatives of a matrix-valued coefficient.
struct MatrixGradient {
  Eigen::Matrix2d dx = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d dy = Eigen::Matrix2d::Zero();
};
using MatrixGradientFn = std::function<MatrixGradient(const Point&)>;

/// Source term evaluated element by element: fills `out[q]` with the value at `points[q]`
/// of element `k`. Lets sources depend on discrete data living on the element.
using VolumeSource =
    std::function<void(std::size_t k, std::span<const Point> points, std::span<double> out)>;

VolumeSource as_source(ScalarFn f);
VolumeSource zero_source();
/// Pointwise sum of two sources.
VolumeSource add_sources(VolumeSource a, VolumeSource b);

struct EllipticCoeffs {
  MatrixFn A;                 // empty: identity
  MatrixGradientFn grad_A;    // empty: zero (constant A)
  ScalarFn f;                 // empty: zero
  ScalarFn phi;               // Dirichlet data; empty: zero
  double mu = 0.0;            // penalty; <= 0 selects 3 m^2
  double lambda = 1.0;        // spectral bounds of A (diagnostic)
  double Lambda = 1.0;

  [[nodiscard]] Eigen::Matrix2d eval_A(const Point& x) const;
  [[nodiscard]] MatrixGradient eval_grad_A(const Point& x) const;
  [[nodiscard]] double penalty(int m) const { return mu > 0.0 ? mu : 3.0 * m * m; }
  [[nodiscard]] bool identity_A() const { return !A; }
};

/// State or adjoint function: one value per element and its reconstructed P_m view.
class DGField {
 public:
  DGField() = default;
  DGField(std::shared_ptr<const ReconstructionMatrix> r, Vector w);

  [[nodiscard]] const ReconstructionMatrix& reconstruction() const { return *r_; }
  [[nodiscard]] const std::shared_ptr<const ReconstructionMatrix>& reconstruction_ptr() const {
    return r_;
  }
  [[nodiscard]] const TriMesh& mesh() const { return r_->mesh(); }
  [[nodiscard]] int degree() const { return r_->degree(); }
  [[nodiscard]] const Vector& dofs() const { return w_; }
  [[nodiscard]] const Vector& coefficients() const { return coeffs_; }
  [[nodiscard]] auto element_coefficients(std::size_t k) const {
    const int d = r_->dim();
    return coeffs_.segment(static_cast<Eigen::Index>(k) * d, d);
  }

  [[nodiscard]] double value(std::size_t k, const Point& x) const;
  [[nodiscard]] Point gradient(std::size_t k, const Point& x) const;
  /// (dxx, dxy, dyy).
  [[nodiscard]] Eigen::Vector3d hessian(std::size_t k, const Point& x) const;
  /// Value at x, using the grid layout when available to locate the element.
  [[nodiscard]] double value_at(const Point& x) const;

  /// Source whose value is g(value of this field) on each element.
  [[nodiscard]] VolumeSource compose(std::function<double(const Point&, double)> g) const;

 private:
  std::shared_ptr<const ReconstructionMatrix> r_;
  Vector w_;
  Vector coeffs_;
};

/// Element-level SIPG matrix on piecewise P_m (before restriction by R).
SparseMatrix assemble_broken_stiffness(const ReconstructionMatrix& r, const EllipticCoeffs& coeffs);
/// R^T A_hat R.
SparseMatrix assemble_stiffness(const ReconstructionMatrix& r, const EllipticCoeffs& coeffs);

/// Piecewise-P_m load (before R^T): volume source plus Nitsche boundary terms for `boundary`.
Vector assemble_broken_load(const ReconstructionMatrix& r, const EllipticCoeffs& coeffs,
                            const VolumeSource& source, const ScalarFn& boundary);
Vector assemble_load(const ReconstructionMatrix& r, const EllipticCoeffs& coeffs,
                     const VolumeSource& source, const ScalarFn& boundary);

/// Discrete solution operator F_h: factorises the stiffness matrix once.
class EllipticSolver {
 public:
  EllipticSolver(std::shared_ptr<const ReconstructionMatrix> r, EllipticCoeffs coeffs,
                 const SolveOptions& options = {});

  [[nodiscard]] DGField solve(const VolumeSource& source, const ScalarFn& boundary,
                              SolveStats* stats = nullptr) const;
  /// Solve with a precomputed (restricted) right-hand side.
  [[nodiscard]] DGField solve_rhs(const Vector& rhs, SolveStats* stats = nullptr) const;
  [[nodiscard]] Vector load(const VolumeSource& source, const ScalarFn& boundary) const;

  [[nodiscard]] const SparseMatrix& stiffness() const { return solver_.matrix(); }
  [[nodiscard]] const EllipticCoeffs& coeffs() const { return coeffs_; }
  [[nodiscard]] const ReconstructionMatrix& reconstruction() const { return *r_; }
  [[nodiscard]] const std::shared_ptr<const ReconstructionMatrix>& reconstruction_ptr() const {
    return r_;
  }
  [[nodiscard]] double penalty() const { return coeffs_.penalty(r_->degree()); }

 private:
  std::shared_ptr<const ReconstructionMatrix> r_;
  EllipticCoeffs coeffs_;
  SpdSolver solver_;
};

DGField solve_elliptic(std::shared_ptr<const ReconstructionMatrix> r, const EllipticCoeffs& coeffs,
                       const VolumeSource& source, const ScalarFn& boundary);

/// Exact reference function for error norms; empty members mean zero.
struct ExactFunction {
  ScalarFn value;
  GradientFn gradient;
};

enum class DGNorm { Plain, Triple };

/// DG norm of field - exact (exact may be empty); jumps weighted by mu / h_e.
double dg_norm(const DGField& field, const ExactFunction& exact, double mu,
               DGNorm variant = DGNorm::Plain, int quad_degree = -1);

/// ||exact - field||_L2; quadrature degree 2m+4 unless given.
double l2_error(const DGField& field, const ScalarFn& exact, int quad_degree = -1);
/// Per-element squared L2 errors.
Vector l2_error_elementwise(const DGField& field, const ScalarFn& exact, int quad_degree = -1);

/// Elementwise barycenter interpolation of f (one value per element).
Vector sample_barycenters(const TriMesh& mesh, const ScalarFn& f);

}  // namespace rdaocp
