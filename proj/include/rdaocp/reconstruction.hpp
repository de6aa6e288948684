#pragma once

#include <memory>
#include <vector>

#include "rdaocp/mesh.hpp"
#include "rdaocp/poly_quad.hpp"
#include "rdaocp/sparse_linalg.hpp"

namespace rdaocp {

/// Patch size threshold #S = ceil(1.5 * dim P_m) for two space dimensions.
int patch_threshold(int m);

/// Element patch S(K): K first, then the elements added by each recursion level.
struct ElementPatch {
  std::size_t owner = 0;
  std::vector<std::size_t> elements;
  int depth = 0;

  [[nodiscard]] std::size_t size() const { return elements.size(); }
};

/// Grows S_t(K) = union of N(K') over K' in S_{t-1}(K) until |S_t(K)| >= threshold,
/// then performs `extra_levels` further recursion steps.
ElementPatch build_patch(const TriMesh& mesh, std::size_t k, int threshold, int extra_levels = 0);

/// Linear map from patch samples (ordered as patch.elements) to the coefficients of
/// the reconstructed polynomial in the LocalBasis of the owner element.
struct LocalReconstruction {
  ElementPatch patch;
  Eigen::MatrixXd map;  // dim x |S(K)|
  Eigen::VectorXd singular_values;
};

/// Constrained least-squares fit on the patch: minimise the barycenter misfit subject to
/// exact interpolation at the owner's barycenter.
LocalReconstruction local_reconstruction(const TriMesh& mesh, const ElementPatch& patch, int m,
                                         double rank_tol = 1e-10);

/// Coefficients (LocalBasis of the owner) fitted to per-element `samples` on `patch`.
Vector solve_local_ls(const TriMesh& mesh, const ElementPatch& patch, const Vector& samples,
                      int m, double rank_tol = 1e-10);

/// Basis used for the degree-m polynomial on element k.
LocalBasis element_basis(const TriMesh& mesh, std::size_t k, int m);

struct ReconstructionOptions {
  int degree = 1;
  int threshold = 0;  // 0 selects patch_threshold(degree)
  double rank_tol = 1e-10;
  int max_extra_levels = 2;
};

/// Global operator mapping one value per element to piecewise P_m coefficients.
/// Rows are grouped per element (row k*dim + a is coefficient a on element k).
class ReconstructionMatrix {
 public:
  ReconstructionMatrix(std::shared_ptr<const TriMesh> mesh, const ReconstructionOptions& options);

  [[nodiscard]] const TriMesh& mesh() const { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const TriMesh>& mesh_ptr() const { return mesh_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] int dim() const { return poly_dim(degree_); }
  [[nodiscard]] int threshold() const { return threshold_; }
  [[nodiscard]] std::size_t num_elements() const { return mesh_->num_elements(); }

  [[nodiscard]] const SparseMatrix& matrix() const { return matrix_; }
  [[nodiscard]] const LocalBasis& basis(std::size_t k) const { return bases_[k]; }
  [[nodiscard]] const ElementPatch& patch(std::size_t k) const { return locals_[k].patch; }
  [[nodiscard]] const LocalReconstruction& local(std::size_t k) const { return locals_[k]; }

  /// Per-element coefficients of R * w.
  [[nodiscard]] Vector apply(const Vector& w) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  int degree_;
  int threshold_;
  std::vector<LocalBasis> bases_;
  std::vector<LocalReconstruction> locals_;
  SparseMatrix matrix_;
};

std::shared_ptr<const ReconstructionMatrix> assemble_reconstruction(
    std::shared_ptr<const TriMesh> mesh, const ReconstructionOptions& options);

}  // namespace rdaocp
