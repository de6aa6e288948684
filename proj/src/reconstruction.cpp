#include "rdaocp/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

namespace rdaocp {

int patch_threshold(int m) {
  if (m < 1) throw InvalidArgument("patch_threshold: reconstruction degree must be >= 1");
  // (d+1)/2 * dim P_m with d = 2, rounded up
  return (3 * poly_dim(m) + 1) / 2;
}

ElementPatch build_patch(const TriMesh& mesh, std::size_t k, int threshold, int extra_levels) {
  if (k >= mesh.num_elements()) throw InvalidArgument("build_patch: element id out of range");
  if (threshold < 1) throw InvalidArgument("build_patch: threshold must be >= 1");
  ElementPatch patch;
  patch.owner = k;
  patch.elements.push_back(k);
  std::vector<char> member(mesh.num_elements(), 0);
  member[k] = 1;

  std::size_t level_begin = 0;
  int remaining_extra = extra_levels;
  while (true) {
    const bool reached = patch.size() >= static_cast<std::size_t>(threshold);
    if (reached && remaining_extra == 0) break;
    if (reached) --remaining_extra;
    const std::size_t level_end = patch.size();
    for (std::size_t i = level_begin; i < level_end; ++i)
      for (const std::size_t e : mesh.element(patch.elements[i]).edges) {
        const Edge& edge = mesh.edge(e);
        for (const std::size_t nb : edge.elements)
          if (nb != kNoElement && !member[nb]) {
            member[nb] = 1;
            patch.elements.push_back(nb);
          }
      }
    if (patch.size() == level_end) {
      if (reached) break;  // extra levels requested but the mesh is exhausted
      std::ostringstream msg;
      msg << "build_patch: mesh with " << mesh.num_elements()
          << " elements cannot supply a patch of " << threshold << " elements";
      throw InvalidArgument(msg.str());
    }
    level_begin = level_end;
    ++patch.depth;
  }
  return patch;
}

LocalBasis element_basis(const TriMesh& mesh, std::size_t k, int m) {
  const ElementInfo& el = mesh.element(k);
  return LocalBasis{m, el.barycenter, el.diameter};
}

LocalReconstruction local_reconstruction(const TriMesh& mesh, const ElementPatch& patch, int m,
                                         double rank_tol) {
  const int dim = poly_dim(m);
  const auto ns = static_cast<Eigen::Index>(patch.size());
  if (ns < dim) {
    std::ostringstream msg;
    msg << "local_reconstruction: patch of element " << patch.owner << " has " << ns
        << " elements, fewer than dim P_" << m << " = " << dim;
    throw ReconstructionError(msg.str());
  }
  const Point xk = mesh.element(patch.owner).barycenter;
  const double hk = mesh.element(patch.owner).diameter;
  double extent = 0.0;
  for (const std::size_t e : patch.elements)
    extent = std::max(extent, (mesh.element(e).barycenter - xk).norm());

  // constant coefficient fixed by the constraint; fit the remaining dim-1 terms
  const auto& exps = monomial_exponents(m);
  const LocalBasis scaled{m, xk, extent};
  Eigen::MatrixXd a(ns - 1, dim - 1);
  std::vector<double> phi(dim);
  for (Eigen::Index i = 1; i < ns; ++i) {
    scaled.values(mesh.element(patch.elements[i]).barycenter, phi);
    for (int j = 1; j < dim; ++j) a(i - 1, j - 1) = phi[j];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  LocalReconstruction out;
  out.patch = patch;
  out.singular_values = sv;
  if (sv.size() == 0 || sv(sv.size() - 1) <= rank_tol * sv(0)) {
    std::ostringstream msg;
    msg << "local_reconstruction: rank-deficient least-squares problem on element " << patch.owner
        << " (patch size " << ns << ", singular values";
    for (Eigen::Index i = 0; i < sv.size(); ++i) msg << ' ' << sv(i);
    msg << ")";
    throw ReconstructionError(msg.str());
  }

  const Eigen::MatrixXd pinv =
      svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  out.map = Eigen::MatrixXd::Zero(dim, ns);
  out.map(0, 0) = 1.0;
  for (int j = 1; j < dim; ++j) {
    const double rescale = std::pow(hk / extent, exps[j][0] + exps[j][1]);
    for (Eigen::Index i = 1; i < ns; ++i) {
      out.map(j, i) = rescale * pinv(j - 1, i - 1);
      out.map(j, 0) -= out.map(j, i);
    }
  }
  return out;
}

Vector solve_local_ls(const TriMesh& mesh, const ElementPatch& patch, const Vector& samples, int m,
                      double rank_tol) {
  if (samples.size() != static_cast<Eigen::Index>(patch.size()))
    throw InvalidArgument("solve_local_ls: one sample per patch element expected");
  return local_reconstruction(mesh, patch, m, rank_tol).map * samples;
}

ReconstructionMatrix::ReconstructionMatrix(std::shared_ptr<const TriMesh> mesh,
                                           const ReconstructionOptions& options)
    : mesh_(std::move(mesh)), degree_(options.degree) {
  if (!mesh_) throw InvalidArgument("ReconstructionMatrix: null mesh");
  if (degree_ < 1) throw InvalidArgument("ReconstructionMatrix: degree must be >= 1");
  threshold_ = options.threshold > 0 ? options.threshold : patch_threshold(degree_);
  const std::size_t ne = mesh_->num_elements();
  bases_.resize(ne);
  locals_.resize(ne);

  parallel_for(ne, [&](std::size_t k) {
    bases_[k] = element_basis(*mesh_, k, degree_);
    for (int extra = 0;; ++extra) {
      try {
        locals_[k] = local_reconstruction(
            *mesh_, build_patch(*mesh_, k, threshold_, extra), degree_, options.rank_tol);
        return;
      } catch (const ReconstructionError&) {
        if (extra >= options.max_extra_levels) throw;
      }
    }
  });

  const int dim = poly_dim(degree_);
  std::vector<Triplet> entries;
  std::size_t count = 0;
  for (const auto& l : locals_) count += l.map.size();
  entries.reserve(count);
  for (std::size_t k = 0; k < ne; ++k) {
    const auto& l = locals_[k];
    for (int a = 0; a < dim; ++a)
      for (std::size_t i = 0; i < l.patch.size(); ++i)
        entries.emplace_back(static_cast<int>(k * dim + a), static_cast<int>(l.patch.elements[i]),
                             l.map(a, static_cast<Eigen::Index>(i)));
  }
  matrix_ = from_triplets(static_cast<Eigen::Index>(ne * dim), static_cast<Eigen::Index>(ne),
                          entries);
}

Vector ReconstructionMatrix::apply(const Vector& w) const {
  if (w.size() != static_cast<Eigen::Index>(num_elements()))
    throw InvalidArgument("ReconstructionMatrix::apply: one value per element expected");
  return matrix_ * w;
}

std::shared_ptr<const ReconstructionMatrix> assemble_reconstruction(
    std::shared_ptr<const TriMesh> mesh, const ReconstructionOptions& options) {
  return std::make_shared<const ReconstructionMatrix>(std::move(mesh), options);
}

}  // namespace rdaocp
