#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "rdaocp/mesh.hpp"

using namespace rdaocp;

namespace {

double signed_area(const std::array<Point, 3>& v) {
  const Point a = v[1] - v[0];
  const Point b = v[2] - v[0];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

std::vector<std::pair<double, double>> sorted_barycenters(const TriMesh& m) {
  std::vector<std::pair<double, double>> out;
  for (const auto& e : m.elements())
    out.emplace_back(std::round(e.barycenter.x() * 1e9) / 1e9, std::round(e.barycenter.y() * 1e9) / 1e9);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("smallest meshes have the hand-counted entities") {
  const TriMesh m1 = TriMesh::build_uniform(1);
  CHECK(m1.num_elements() == 2);
  CHECK(m1.num_vertices() == 4);
  CHECK(m1.num_edges() == 5);
  CHECK(m1.num_boundary_edges() == 4);

  const TriMesh m2 = TriMesh::build_uniform(2);
  CHECK(m2.num_elements() == 8);
  CHECK(m2.num_vertices() == 9);
  CHECK(m2.num_edges() == 16);
  CHECK(m2.num_boundary_edges() == 8);
}

TEST_CASE("Euler characteristic and areas") {
  for (std::size_t n : {1, 2, 3, 5, 8}) {
    const TriMesh m = TriMesh::build_uniform(n, {0.0, -1.0, 2.0, 0.5});
    const long v = static_cast<long>(m.num_vertices());
    const long e = static_cast<long>(m.num_edges());
    const long f = static_cast<long>(m.num_elements());
    CHECK(v - e + f == 1);
    double area = 0.0;
    for (std::size_t k = 0; k < m.num_elements(); ++k) {
      const double a = signed_area(m.element_vertices(k));
      CHECK(a > 0.0);
      CHECK(std::abs(a - m.element(k).area) < 1e-14);
      area += a;
    }
    CHECK(std::abs(area - 3.0) < 1e-13 * 3.0);
    CHECK(std::abs(m.mesh_size() - std::hypot(2.0 / n, 1.5 / n)) < 1e-13);
  }
}

TEST_CASE("edge adjacency and normals") {
  const TriMesh m = TriMesh::build_uniform(4);
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const Edge& ed = m.edge(e);
    CHECK(ed.vertices[0] < ed.vertices[1]);
    CHECK(std::abs(ed.normals[0].norm() - 1.0) < 1e-14);
    const Point mid = 0.5 * (m.vertex(ed.vertices[0]) + m.vertex(ed.vertices[1]));
    CHECK((mid - m.element(ed.elements[0]).barycenter).dot(ed.normals[0]) > 0.0);
    if (ed.is_boundary()) continue;
    CHECK((ed.normals[0] + ed.normals[1]).norm() < 1e-14);
    CHECK((mid - m.element(ed.elements[1]).barycenter).dot(ed.normals[1]) > 0.0);
  }
  // every element lists its three edges and is adjacent to each
  for (std::size_t k = 0; k < m.num_elements(); ++k)
    for (std::size_t e : m.element(k).edges) {
      const Edge& ed = m.edge(e);
      CHECK((ed.elements[0] == k || ed.elements[1] == k));
    }
}

TEST_CASE("face neighbours") {
  const TriMesh m4 = TriMesh::build_uniform(4);
  // square (1,1), lower triangle is interior
  const std::size_t k = 2 * (1 * 4 + 1);
  const auto nb = m4.face_neighbors(k);
  CHECK(nb.size() == 4);
  CHECK(std::find(nb.begin(), nb.end(), k) != nb.end());

  const TriMesh m1 = TriMesh::build_uniform(1);
  CHECK(m1.face_neighbors(0).size() == 2);
  CHECK(m1.face_neighbors(1).size() == 2);

  for (std::size_t n : {1, 2, 3, 6}) {
    const TriMesh m = TriMesh::build_uniform(n);
    for (std::size_t a = 0; a < m.num_elements(); ++a) {
      const auto na = m.face_neighbors(a);
      CHECK(na.size() >= 2);
      CHECK(na.size() <= 4);
      CHECK(na.front() == a);
      CHECK(std::is_sorted(na.begin() + 1, na.end()));
      for (std::size_t b : na) {
        const auto nbb = m.face_neighbors(b);
        CHECK(std::find(nbb.begin(), nbb.end(), a) != nbb.end());
      }
    }
  }
  CHECK_THROWS_AS((void)m4.face_neighbors(m4.num_elements()), InvalidArgument);
}

TEST_CASE("uniform refinement") {
  const TriMesh m1 = TriMesh::build_uniform(1);
  const TriMesh r1 = m1.refine_uniform();
  CHECK(r1.num_elements() == 8);
  CHECK(std::abs(r1.min_angle() - m1.min_angle()) < 1e-14);
  CHECK(std::abs(r1.min_angle() - std::numbers::pi / 4.0) < 1e-14);
  CHECK(std::abs(r1.grade_constant() - m1.grade_constant()) < 1e-12);

  for (std::size_t n : {1, 2, 3}) {
    const TriMesh coarse = TriMesh::build_uniform(n);
    const TriMesh refined = coarse.refine_uniform();
    const TriMesh direct = TriMesh::build_uniform(2 * n);
    CHECK(sorted_barycenters(refined) == sorted_barycenters(direct));
    CHECK(std::abs(refined.grade_constant() - coarse.grade_constant()) < 1e-12);
  }
}

TEST_CASE("grid point location matches element numbering") {
  const TriMesh m = TriMesh::build_uniform(5, {-1.0, 0.0, 1.0, 2.0});
  REQUIRE(m.grid());
  for (std::size_t k = 0; k < m.num_elements(); ++k) {
    CHECK(m.grid()->locate(m.element(k).barycenter) == k);
    const auto a = m.grid()->element_vertices(k);
    const auto b = m.element_vertices(k);
    for (int i = 0; i < 3; ++i) CHECK((a[i] - b[i]).norm() < 1e-14);
  }
}

TEST_CASE("mesh construction errors and dump") {
  CHECK_THROWS_AS(TriMesh::build_uniform(0), InvalidArgument);
  CHECK_THROWS_AS(TriMesh::build_uniform(2, {0.0, 0.0, 0.0, 1.0}), InvalidArgument);
  std::ostringstream os;
  TriMesh::build_uniform(2).dump(os);
  std::istringstream is(os.str());
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) ++lines;
  CHECK(lines == 2 + 9 + 8);
}
