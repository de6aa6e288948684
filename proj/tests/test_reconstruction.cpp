#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "rdaocp/ipdg.hpp"

using namespace rdaocp;

namespace {

std::shared_ptr<const TriMesh> unit_mesh(std::size_t n) {
  return std::make_shared<const TriMesh>(TriMesh::build_uniform(n));
}

// Coefficients of x^a y^b in the basis ((x - c) / s)^e.
Vector monomial_coefficients(const LocalBasis& b, int a, int bb) {
  const auto& ex = monomial_exponents(b.degree);
  Vector c = Vector::Zero(b.dim());
  const auto binom = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  for (int i = 0; i <= a; ++i)
    for (int j = 0; j <= bb; ++j) {
      const double v = binom(a, i) * binom(bb, j) * std::pow(b.center.x(), a - i) *
                       std::pow(b.center.y(), bb - j) * std::pow(b.scale, i + j);
      for (int e = 0; e < b.dim(); ++e)
        if (ex[e][0] == i && ex[e][1] == j) c(e) += v;
    }
  return c;
}

}  // namespace

TEST_CASE("patch thresholds") {
  CHECK(patch_threshold(1) == 5);
  CHECK(patch_threshold(2) == 9);
  CHECK(patch_threshold(3) == 15);
  CHECK_THROWS_AS(patch_threshold(0), InvalidArgument);
}

TEST_CASE("patch growth") {
  const TriMesh mesh = TriMesh::build_uniform(4);
  const std::size_t k = 2 * (1 * 4 + 1);
  const ElementPatch p1 = build_patch(mesh, k, 1);
  CHECK(p1.size() == 1);
  CHECK(p1.depth == 0);
  CHECK(p1.elements[0] == k);

  // S_1 of an interior element holds 4 elements, so threshold 5 needs S_2
  const ElementPatch p5 = build_patch(mesh, k, 5);
  CHECK(p5.depth == 2);
  std::set<std::size_t> s2;
  for (std::size_t a : mesh.face_neighbors(k))
    for (std::size_t b : mesh.face_neighbors(a)) s2.insert(b);
  CHECK(p5.size() == s2.size());
  CHECK(std::set<std::size_t>(p5.elements.begin(), p5.elements.end()) == s2);
  CHECK(p5.elements[0] == k);

  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    std::set<std::size_t> prev;
    for (int t : {1, 3, 5, 9, 15}) {
      const ElementPatch p = build_patch(mesh, e, t);
      CHECK(p.size() >= static_cast<std::size_t>(t));
      const std::set<std::size_t> cur(p.elements.begin(), p.elements.end());
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
  CHECK_THROWS_AS(build_patch(TriMesh::build_uniform(1), 0, 5), InvalidArgument);
  CHECK_THROWS_AS(build_patch(mesh, 0, 0), InvalidArgument);
}

TEST_CASE("local least squares") {
  const TriMesh mesh = TriMesh::build_uniform(4);
  const std::size_t k = 2 * (1 * 4 + 1);
  const ElementPatch patch = build_patch(mesh, k, 5);
  const LocalBasis basis = element_basis(mesh, k, 1);

  const Vector ones = Vector::Constant(static_cast<Eigen::Index>(patch.size()), 2.5);
  const Vector c = solve_local_ls(mesh, patch, ones, 1);
  CHECK(std::abs(c(0) - 2.5) < 1e-14);
  CHECK(c.tail(2).norm() < 1e-13);

  Vector xs(static_cast<Eigen::Index>(patch.size()));
  for (std::size_t i = 0; i < patch.size(); ++i)
    xs(static_cast<Eigen::Index>(i)) = mesh.element(patch.elements[i]).barycenter.x();
  CHECK((solve_local_ls(mesh, patch, xs, 1) - monomial_coefficients(basis, 1, 0)).norm() < 1e-13);

  // dense KKT oracle: [M^T M  e0; e0^T M_0  0]
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto np = static_cast<Eigen::Index>(patch.size());
  std::vector<Point> pts;
  for (std::size_t e : patch.elements) pts.push_back(mesh.element(e).barycenter);
  const BasisTable t = eval_basis(basis, pts, 0);
  for (int trial = 0; trial < 5; ++trial) {
    Vector w(np);
    for (Eigen::Index i = 0; i < np; ++i) w(i) = U(rng);
    const Eigen::Index d = basis.dim();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(d + 1, d + 1);
    kkt.topLeftCorner(d, d) = t.values.transpose() * t.values;
    kkt.block(0, d, d, 1) = t.values.row(0).transpose();
    kkt.block(d, 0, 1, d) = t.values.row(0);
    Vector rhs(d + 1);
    rhs.head(d) = t.values.transpose() * w;
    rhs(d) = w(0);
    const Vector oracle = kkt.fullPivLu().solve(rhs).head(d);
    CHECK((solve_local_ls(mesh, patch, w, 1) - oracle).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("global reconstruction reproduces polynomials") {
  for (std::size_t n : {4, 8}) {
    auto mesh = unit_mesh(n);
    for (int m : {1, 2, 3}) {
      const ReconstructionMatrix r(mesh, {.degree = m});
      CHECK(r.matrix().cols() == static_cast<Eigen::Index>(mesh->num_elements()));
      CHECK(r.matrix().rows() == static_cast<Eigen::Index>(mesh->num_elements()) * r.dim());
      double worst = 0.0;
      for (int a = 0; a <= m; ++a)
        for (int b = 0; a + b <= m; ++b) {
          const Vector w = sample_barycenters(
              *mesh, [a, b](const Point& x) { return std::pow(x.x(), a) * std::pow(x.y(), b); });
          const Vector c = r.apply(w);
          for (std::size_t k = 0; k < mesh->num_elements(); ++k) {
            const Vector exact = monomial_coefficients(r.basis(k), a, b);
            worst = std::max(worst,
                             (c.segment(static_cast<Eigen::Index>(k) * r.dim(), r.dim()) - exact)
                                 .cwiseAbs()
                                 .maxCoeff());
          }
        }
      CHECK(worst <= 1e-10);
    }
  }
}

TEST_CASE("constraint exactness and locality") {
  auto mesh = unit_mesh(6);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int m : {1, 2}) {
    const ReconstructionMatrix r(mesh, {.degree = m});
    std::vector<double> vals(static_cast<std::size_t>(r.dim()));
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Vector w(static_cast<Eigen::Index>(mesh->num_elements()));
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = U(rng);
      const Vector c = r.apply(w);
      for (std::size_t k = 0; k < mesh->num_elements(); ++k) {
        r.basis(k).values(mesh->element(k).barycenter, vals);
        double v = 0.0;
        for (int a = 0; a < r.dim(); ++a) v += vals[a] * c(static_cast<Eigen::Index>(k) * r.dim() + a);
        worst = std::max(worst, std::abs(v - w(static_cast<Eigen::Index>(k))));
      }
    }
    CHECK(worst <= 1e-12);

    const Vector one = r.apply(Vector::Ones(static_cast<Eigen::Index>(mesh->num_elements())));
    for (std::size_t k = 0; k < mesh->num_elements(); ++k) {
      CHECK(std::abs(one(static_cast<Eigen::Index>(k) * r.dim()) - 1.0) < 1e-13);
      CHECK(one.segment(static_cast<Eigen::Index>(k) * r.dim() + 1, r.dim() - 1).norm() < 1e-12);
    }

    const SparseMatrix& a = r.matrix();
    bool local = true;
    for (Eigen::Index row = 0; row < a.outerSize(); ++row) {
      const auto& patch = r.patch(static_cast<std::size_t>(row / r.dim())).elements;
      for (SparseMatrix::InnerIterator it(a, row); it; ++it)
        if (std::find(patch.begin(), patch.end(), static_cast<std::size_t>(it.col())) == patch.end())
          local = false;
    }
    CHECK(local);
  }
}
