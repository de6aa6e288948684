#include <cmath>
#include <random>

#include "doctest.h"
#include "rdaocp/estimators.hpp"
#include "rdaocp/examples.hpp"

using namespace rdaocp;

namespace {

std::shared_ptr<const ReconstructionMatrix> make_r(std::size_t n, int m) {
  auto mesh = std::make_shared<const TriMesh>(TriMesh::build_uniform(n));
  return assemble_reconstruction(mesh, {.degree = m});
}

Vector random_vector(Eigen::Index n, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = U(rng);
  return v;
}

EllipticCoeffs variable_coeffs() {
  EllipticCoeffs c;
  c.A = [](const Point& x) {
    Eigen::Matrix2d a;
    a << 1.0 + x.x() * x.x(), 0.2 * x.y(), 0.2 * x.y(), 2.0 + x.x() * x.y();
    return a;
  };
  c.grad_A = [](const Point& x) {
    MatrixGradient g;
    g.dx << 2.0 * x.x(), 0.0, 0.0, x.y();
    g.dy << 0.0, 0.2, 0.2, x.x();
    return g;
  };
  return c;
}

std::shared_ptr<const OcpDiscretization> control_problem(std::size_t n, AdmissibleSet set,
                                                         ScalarFn u_d) {
  const auto r = make_r(n, 1);
  auto space = std::make_shared<const PiecewiseConstantSpace>(
      r, std::make_shared<const ControlMesh>(n), 1.0);
  ProblemSpec spec;
  spec.g_prime = [](const Point&, double) { return 0.0; };
  spec.j_prime = [u_d](const Point& x, double u) { return u - u_d(x); };
  spec.admissible = set;
  return std::make_shared<const OcpDiscretization>(spec, r, space);
}

}  // namespace

TEST_CASE("volume residual") {
  const auto r1 = make_r(4, 1);
  std::mt19937 rng(1);
  const DGField f1(r1, random_vector(static_cast<Eigen::Index>(r1->num_elements()), rng));
  const ScalarFn src = [](const Point& x) { return 1.0 + x.x() * x.x(); };
  const Vector eta = eta_volume(f1, as_source(src), {});
  const TriMesh& mesh = r1->mesh();
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    std::vector<Point> pts;
    std::vector<double> wts;
    map_triangle_rule(triangle_rule(8), mesh.element_vertices(k), pts, wts);
    double s = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) s += wts[q] * src(pts[q]) * src(pts[q]);
    const double ht = mesh.element(k).diameter / 3.0;
    CHECK(std::abs(eta(static_cast<Eigen::Index>(k)) - ht * ht * std::sqrt(s)) < 1e-14);
  }

  const auto r2 = make_r(4, 2);
  const DGField sq(r2, sample_barycenters(r2->mesh(), [](const Point& x) { return x.x() * x.x(); }));
  // barycenter samples of x^2 are not x^2's means, but the reconstruction is exact for P_2
  CHECK(eta_volume(sq, as_source([](const Point&) { return -2.0; }), {}).cwiseAbs().maxCoeff() < 1e-12);

  // finite-difference oracle for div(A grad y) with variable A
  const EllipticCoeffs c = variable_coeffs();
  const DGField f2(r2, random_vector(static_cast<Eigen::Index>(r2->num_elements()), rng));
  const Vector eta2 = eta_volume(f2, as_source(src), c, 8);
  const double h = 1e-5;
  const double mu = c.penalty(2);
  double worst = 0.0;
  for (std::size_t k = 0; k < r2->num_elements(); ++k) {
    std::vector<Point> pts;
    std::vector<double> wts;
    map_triangle_rule(triangle_rule(8), r2->mesh().element_vertices(k), pts, wts);
    const auto flux = [&](const Point& x) -> Point { return c.eval_A(x) * f2.gradient(k, x); };
    double s = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const Point& x = pts[q];
      const double div = (flux(x + Point(h, 0)).x() - flux(x - Point(h, 0)).x()) / (2 * h) +
                         (flux(x + Point(0, h)).y() - flux(x - Point(0, h)).y()) / (2 * h);
      const double res = src(x) + div;
      s += wts[q] * res * res;
    }
    const double ht = r2->mesh().element(k).diameter / mu;
    worst = std::max(worst, std::abs(eta2(static_cast<Eigen::Index>(k)) - ht * ht * std::sqrt(s)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("jump indicators") {
  const auto r = make_r(4, 2);
  const TriMesh& mesh = r->mesh();
  const DGField c(r, Vector::Constant(static_cast<Eigen::Index>(mesh.num_elements()), 1.5));
  const JumpIndicators j = eta_jumps(c, {});
  CHECK(j.eta3.norm() < 1e-15);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    const double expect = ed.is_boundary() ? std::sqrt(ed.length / 12.0 * 1.5 * 1.5 * ed.length) : 0.0;
    CHECK(std::abs(j.eta2(static_cast<Eigen::Index>(e)) - expect) < 1e-14);
  }
  const JumpIndicators jb = eta_jumps(c, {}, [](const Point&) { return 1.5; });
  CHECK(jb.eta2.norm() < 1e-14);

  // two-sided trace oracle
  std::mt19937 rng(6);
  const DGField f(r, random_vector(static_cast<Eigen::Index>(mesh.num_elements()), rng));
  const JumpIndicators jf = eta_jumps(f, {});
  const QuadRule& rule = edge_rule(8);
  double worst = 0.0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edge(e);
    double j2 = 0.0, f2 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = mesh.edge_point(e, rule.points[q].x());
      const double w = rule.weights[q] * ed.length;
      if (ed.is_boundary()) {
        const double v = f.value(ed.elements[0], x);
        j2 += w * v * v;
        continue;
      }
      const double v = f.value(ed.elements[0], x) - f.value(ed.elements[1], x);
      const double g = f.gradient(ed.elements[0], x).dot(ed.normals[0]) +
                       f.gradient(ed.elements[1], x).dot(ed.normals[1]);
      j2 += w * v * v;
      f2 += w * g * g;
    }
    const double ht = ed.length / 12.0;
    const auto ei = static_cast<Eigen::Index>(e);
    worst = std::max(worst, std::abs(jf.eta2(ei) - std::sqrt(ht * j2)));
    worst = std::max(worst, std::abs(jf.eta3(ei) - std::sqrt(ht * ht * ht * f2)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("control indicator") {
  const std::size_t n = 4;
  {
    const auto disc = control_problem(n, AdmissibleSet::unconstrained(), [](const Point&) { return 0.3; });
    std::mt19937 rng(2);
    const Vector u = random_vector(static_cast<Eigen::Index>(disc->space().size()), rng);
    const DGField p(disc->reconstruction_ptr(), Vector::Zero(static_cast<Eigen::Index>(2 * n * n)));
    CHECK(eta_control(*disc, u, p, ControlEstimate::General).eta0 < 1e-14);
    CHECK_THROWS_AS(eta_control(*disc, u, p, ControlEstimate::Sharp), InvalidArgument);
  }
  {
    // u_d = x: (I - Pi) x on each element of side 1/n
    const auto disc = control_problem(n, AdmissibleSet::unconstrained(), [](const Point& x) { return x.x(); });
    const Vector u = Vector::Zero(static_cast<Eigen::Index>(disc->space().size()));
    const DGField p(disc->reconstruction_ptr(), Vector::Zero(static_cast<Eigen::Index>(2 * n * n)));
    // variance of x over a right triangle with legs h: h^2 / 18, times area h^2 / 2
    const double h = 1.0 / n;
    const double expect = std::sqrt(2.0 * n * n * h * h / 18.0 * h * h / 2.0);
    CHECK(std::abs(eta_control(*disc, u, p, ControlEstimate::General).eta0 - expect) < 1e-13);
  }
  for (double shift : {1.0, -1.0}) {
    const auto disc =
        control_problem(n, AdmissibleSet::lower_bound(0.0), [shift](const Point&) { return -shift; });
    const Vector u = Vector::Zero(static_cast<Eigen::Index>(disc->space().size()));
    const DGField p(disc->reconstruction_ptr(), Vector::Zero(static_cast<Eigen::Index>(2 * n * n)));
    const ControlIndicator ci = eta_control(*disc, u, p, ControlEstimate::Sharp);
    REQUIRE(ci.labels.size() == disc->space().size());
    for (ActiveLabel l : ci.labels)
      CHECK(l == (shift > 0 ? ActiveLabel::ActiveSigned : ActiveLabel::Active));
    CHECK(std::abs(ci.eta0_sharp - (shift > 0 ? 0.0 : 1.0)) < 1e-13);
  }
}

TEST_CASE("example 1 indicators") {
  const auto r = make_r(8, 1);
  auto space = std::make_shared<const PiecewiseConstantSpace>(r, std::make_shared<const ControlMesh>(8), 1.0);
  const OcpDiscretization disc(make_example(ExampleId::Ex1_LowerBound), r, space);
  const OcpSolution sol = pgd_solve(disc, {.rho = 1.0});
  const IndicatorReport rep = compute_indicators(disc, sol, ControlEstimate::Sharp);
  REQUIRE(rep.has_control);
  std::size_t inactive = 0, active = 0;
  for (std::size_t c = 0; c < rep.control.labels.size(); ++c) {
    const bool at_bound = sol.u.values(static_cast<Eigen::Index>(c)) <= 1e-10;
    if (rep.control.labels[c] == ActiveLabel::Inactive) {
      ++inactive;
      CHECK(!at_bound);
    } else {
      ++active;
      CHECK(at_bound);
    }
  }
  CHECK(inactive + active == space->size());
  CHECK(inactive > 0);
  CHECK(active > 0);
  const double rss = std::sqrt(rep.control.eta0_sharp * rep.control.eta0_sharp +
                               rep.eta1_y.squaredNorm() + rep.eta1_p.squaredNorm() +
                               rep.jumps_y.eta2.squaredNorm() + rep.jumps_y.eta3.squaredNorm() +
                               rep.jumps_p.eta2.squaredNorm() + rep.jumps_p.eta3.squaredNorm());
  CHECK(std::abs(rep.total(ControlEstimate::Sharp) - rss) <= 1e-12 * rss);
  for (const Vector* v : {&rep.eta1_y, &rep.eta1_p, &rep.jumps_y.eta2, &rep.jumps_p.eta3})
    CHECK(v->minCoeff() >= 0.0);

  // synthetic exact solution equal to the computed one: every ratio is zero
  ProblemSpec spec = make_example(ExampleId::Ex1_LowerBound);
  const DGField y = sol.y, p = sol.p;
  const Vector u = sol.u.values;
  spec.exact->y = [y](const Point& x) { return y.value_at(x); };
  spec.exact->p = [p](const Point& x) { return p.value_at(x); };
  spec.exact->u = [u, space](const Point& x) {
    return u(static_cast<Eigen::Index>(space->control_mesh().locate(x)));
  };
  const OcpDiscretization same(spec, r, space);
  const EffectivityReport eff = effectivity(same, sol, compute_indicators(same, sol));
  CHECK(eff.e_y.cwiseAbs().maxCoeff() == 0.0);
  CHECK(eff.e_p.cwiseAbs().maxCoeff() == 0.0);
  CHECK(eff.e_u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(EffectivityReport::min_positive(eff.e_y) == 0.0);
}

TEST_CASE("patch recovery") {
  const auto mesh = std::make_shared<const ControlMesh>(4);
  const auto nc = static_cast<Eigen::Index>(mesh->num_elements());
  const ScalarFn lin = [](const Point& x) { return 0.5 + 2.0 * x.x() - 3.0 * x.y(); };
  const RecoveredControl r = zz_recover(mesh, element_means(*mesh, lin));
  for (std::size_t i = 0; i < mesh->num_nodes(); ++i)
    if (!r.fallback[i]) CHECK(std::abs(r.nodal(static_cast<Eigen::Index>(i)) - lin(mesh->node(i))) < 1e-12);
  CHECK(r.l2_error(lin) < 1e-12);

  const RecoveredControl c = zz_recover(mesh, Vector::Constant(nc, 0.7));
  CHECK((c.nodal.array() - 0.7).abs().maxCoeff() < 1e-13);

  std::mt19937 rng(12);
  const Vector u = random_vector(nc, rng), v = random_vector(nc, rng);
  const RecoveredControl ru = zz_recover(mesh, u), rv = zz_recover(mesh, v);
  CHECK((zz_recover(mesh, 2.0 * u - v).nodal - (2.0 * ru.nodal - rv.nodal)).cwiseAbs().maxCoeff() < 1e-12);

  // interior node (2,2): dense weighted least-squares oracle
  const std::size_t node = 2 * 5 + 2;
  const auto elems = mesh->node_elements(node);
  CHECK(elems.size() == 6);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(elems.size()), 3);
  Vector rhs(static_cast<Eigen::Index>(elems.size()));
  for (std::size_t i = 0; i < elems.size(); ++i) {
    const double w = std::sqrt(mesh->element_area());
    const Point b = mesh->barycenter(elems[i]);
    a.row(static_cast<Eigen::Index>(i)) << w, w * b.x(), w * b.y();
    rhs(static_cast<Eigen::Index>(i)) = w * u(static_cast<Eigen::Index>(elems[i]));
  }
  const Eigen::Vector3d abc = a.colPivHouseholderQr().solve(rhs);
  const Point z = mesh->node(node);
  CHECK(std::abs(ru.nodal(static_cast<Eigen::Index>(node)) - (abc(0) + abc(1) * z.x() + abc(2) * z.y())) <
        1e-10);
  // corner nodes touching one element use the enlarged patch
  CHECK(ru.fallback[0] == 1);
}

TEST_CASE("effectivity extremes") {
  Vector v(4);
  v << 0.0, 3.0, 0.5, 1.0;
  CHECK(EffectivityReport::min_positive(v) == 0.5);
  CHECK(EffectivityReport::max_of(v) == 3.0);
}
