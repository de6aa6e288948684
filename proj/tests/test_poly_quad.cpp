#include <cmath>
#include <random>

#include "doctest.h"
#include "rdaocp/mesh.hpp"
#include "rdaocp/poly_quad.hpp"
#include "rdaocp/reconstruction.hpp"

using namespace rdaocp;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// int_T x^a y^b over the reference triangle
double dirichlet_moment(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

}  // namespace

TEST_CASE("triangle rules") {
  const QuadRule& r1 = triangle_rule(1);
  REQUIRE(r1.size() == 1);
  CHECK(std::abs(r1.weights[0] - 0.5) < 1e-15);
  CHECK((r1.points[0] - Point(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-15);

  const QuadRule& r2 = triangle_rule(2);
  double ix = 0.0;
  for (std::size_t q = 0; q < r2.size(); ++q) ix += r2.weights[q] * r2.points[q].x();
  CHECK(std::abs(ix - 1.0 / 6.0) < 1e-15);

  const QuadRule& r5 = triangle_rule(5);
  double m23 = 0.0;
  for (std::size_t q = 0; q < r5.size(); ++q)
    m23 += r5.weights[q] * std::pow(r5.points[q].x(), 2) * std::pow(r5.points[q].y(), 3);
  CHECK(std::abs(m23 - 1.0 / 420.0) < 1e-13 / 420.0);

  for (int d = 0; d <= kMaxQuadDegree; ++d) {
    const QuadRule& r = triangle_rule(d);
    CHECK(r.degree >= d);
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q)
          s += r.weights[q] * std::pow(r.points[q].x(), a) * std::pow(r.points[q].y(), b);
        const double exact = dirichlet_moment(a, b);
        CHECK(std::abs(s - exact) <= 1e-13 * exact);
      }
  }
  CHECK_THROWS_AS(triangle_rule(-1), InvalidArgument);
  CHECK_THROWS_AS(triangle_rule(kMaxQuadDegree + 1), InvalidArgument);
}

TEST_CASE("edge rules") {
  const QuadRule& e1 = edge_rule(1);
  REQUIRE(e1.size() == 1);
  CHECK(std::abs(e1.points[0].x() - 0.5) < 1e-15);
  CHECK(std::abs(e1.weights[0] - 1.0) < 1e-15);

  std::vector<double> x, w;
  gauss_legendre(2, x, w);
  CHECK(std::abs(w[0] * x[0] * x[0] + w[1] * x[1] * x[1] - 1.0 / 3.0) < 1e-15);
  gauss_legendre(4, x, w);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += w[i] * std::pow(x[i], 7);
  CHECK(std::abs(s - 0.125) < 1e-15);

  for (int d = 0; d <= 41; ++d) {
    const QuadRule& r = edge_rule(d);
    double t = 0.0;
    for (std::size_t q = 0; q < r.size(); ++q) t += r.weights[q] * std::pow(r.points[q].x(), d);
    CHECK(std::abs(t - 1.0 / (d + 1)) < 1e-13);
  }
  CHECK_THROWS_AS(edge_rule(42), InvalidArgument);
}

TEST_CASE("mapped rules integrate over physical triangles") {
  const std::array<Point, 3> tri{Point(0.2, 0.1), Point(1.0, 0.4), Point(0.3, 0.9)};
  std::vector<Point> pts;
  std::vector<double> wts;
  map_triangle_rule(triangle_rule(2), tri, pts, wts);
  double area = 0.0, mx = 0.0;
  for (std::size_t q = 0; q < pts.size(); ++q) {
    area += wts[q];
    mx += wts[q] * pts[q].x();
  }
  const double exact_area = 0.5 * std::abs((tri[1] - tri[0]).x() * (tri[2] - tri[0]).y() -
                                           (tri[1] - tri[0]).y() * (tri[2] - tri[0]).x());
  CHECK(std::abs(area - exact_area) < 1e-15);
  CHECK(std::abs(mx / area - (0.2 + 1.0 + 0.3) / 3.0) < 1e-14);
}

TEST_CASE("basis values and derivatives") {
  CHECK(poly_dim(1) == 3);
  CHECK(poly_dim(3) == 10);
  const LocalBasis b1{1, Point(0.3, 0.4), 0.25};
  std::vector<double> v(3), gx(3), gy(3);
  b1.values(b1.center, v);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == 0.0);
  b1.gradients(Point(0.9, -0.2), gx, gy);
  CHECK(std::abs(gx[1] - 4.0) < 1e-15);
  CHECK(gy[1] == 0.0);
  CHECK(gx[0] == 0.0);
  CHECK(gy[0] == 0.0);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const LocalBasis b{4, Point(0.1, -0.2), 0.7};
  const int dim = b.dim();
  std::vector<Point> pts;
  for (int i = 0; i < 10; ++i) pts.emplace_back(U(rng), U(rng));
  const BasisTable t = eval_basis(b, pts, 2);
  const double h = 1e-6;
  double worst_grad = 0.0, worst_hess = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const BasisTable px = eval_basis(b, std::vector<Point>{pts[i] + Point(h, 0), pts[i] - Point(h, 0)}, 1);
    const BasisTable py = eval_basis(b, std::vector<Point>{pts[i] + Point(0, h), pts[i] - Point(0, h)}, 1);
    for (int a = 0; a < dim; ++a) {
      const auto ii = static_cast<Eigen::Index>(i);
      worst_grad = std::max(worst_grad, std::abs((px.values(0, a) - px.values(1, a)) / (2 * h) - t.dx(ii, a)));
      worst_grad = std::max(worst_grad, std::abs((py.values(0, a) - py.values(1, a)) / (2 * h) - t.dy(ii, a)));
      worst_hess = std::max(worst_hess, std::abs((px.dx(0, a) - px.dx(1, a)) / (2 * h) - t.dxx(ii, a)));
      worst_hess = std::max(worst_hess, std::abs((py.dx(0, a) - py.dx(1, a)) / (2 * h) - t.dxy(ii, a)));
      worst_hess = std::max(worst_hess, std::abs((py.dy(0, a) - py.dy(1, a)) / (2 * h) - t.dyy(ii, a)));
    }
  }
  CHECK(worst_grad <= 1e-7);
  CHECK(worst_hess <= 1e-6);
  CHECK_THROWS_AS(eval_basis(b, pts, 3), InvalidArgument);
}

TEST_CASE("scaled basis keeps the element Gram matrix conditioning mesh independent") {
  const auto cond = [](std::size_t n) {
    const TriMesh mesh = TriMesh::build_uniform(n);
    const LocalBasis b = element_basis(mesh, 0, 3);
    std::vector<Point> pts;
    std::vector<double> wts;
    map_triangle_rule(triangle_rule(6), mesh.element_vertices(0), pts, wts);
    const BasisTable t = eval_basis(b, pts, 0);
    Eigen::MatrixXd g = t.values.transpose() *
                        Eigen::Map<const Eigen::VectorXd>(wts.data(), static_cast<Eigen::Index>(wts.size())).asDiagonal() *
                        t.values;
    g /= mesh.element(0).area;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  };
  const double c4 = cond(4), c8 = cond(8);
  CHECK(std::max(c4, c8) / std::min(c4, c8) <= 1.05);
}
