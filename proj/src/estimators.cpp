#include "rdaocp/estimators.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace rdaocp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// -div(A grad) residual pieces for one element.
double divergence_flux(const DGField& field, const EllipticCoeffs& coeffs, std::size_t k,
                       const Point& x) {
  const Eigen::Vector3d h = field.hessian(k, x);
  if (coeffs.identity_A()) return h(0) + h(2);
  const Eigen::Matrix2d a = coeffs.eval_A(x);
  const MatrixGradient da = coeffs.eval_grad_A(x);
  const Point g = field.gradient(k, x);
  const Eigen::RowVector2d div_a = da.dx.row(0) + da.dy.row(1);
  return div_a.dot(g) + a(0, 0) * h(0) + 2.0 * a(0, 1) * h(1) + a(1, 1) * h(2);
}

// Control values as a volume source on the state mesh.
VolumeSource control_source(const ControlSpace& space, const Vector& u) {
  const double cb = space.c_B();
  if (const auto* pc = dynamic_cast<const PiecewiseConstantSpace*>(&space)) {
    return [pc, &u, cb](std::size_t, std::span<const Point> pts, std::span<double> out) {
      for (std::size_t q = 0; q < pts.size(); ++q)
        out[q] = cb * u(static_cast<Eigen::Index>(pc->control_mesh().locate(pts[q])));
    };
  }
  const auto& qs = dynamic_cast<const QuadSampledSpace&>(space);
  return [&qs, &u, cb](std::size_t k, std::span<const Point> pts, std::span<double> out) {
    if (pts.size() != qs.points_per_element())
      throw InvalidArgument("control source: quadrature layout mismatch");
    for (std::size_t q = 0; q < pts.size(); ++q)
      out[q] = cb * u(static_cast<Eigen::Index>(k * qs.points_per_element() + q));
  };
}

}  // namespace

Vector eta_volume(const DGField& field, const VolumeSource& source, const EllipticCoeffs& coeffs,
                  int quad_degree) {
  if (!coeffs.identity_A() && !coeffs.grad_A)
    throw InvalidArgument("eta_volume: variable A requires its gradient");
  const TriMesh& mesh = field.mesh();
  const int m = field.degree();
  const double mu = coeffs.penalty(m);
  const int qdeg = quad_degree > 0 ? quad_degree : error_degree(m);
  const QuadRule& rule = triangle_rule(qdeg);
  Vector eta(static_cast<Eigen::Index>(mesh.num_elements()));
  parallel_for(mesh.num_elements(), [&](std::size_t k) {
    std::vector<Point> pts;
    std::vector<double> wts;
    map_triangle_rule(rule, mesh.element_vertices(k), pts, wts);
    std::vector<double> f(pts.size(), 0.0);
    if (source) source(k, pts, f);
    double s = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double res = f[q] + divergence_flux(field, coeffs, k, pts[q]);
      s += wts[q] * res * res;
    }
    const double ht = mesh.element(k).diameter / mu;
    eta(static_cast<Eigen::Index>(k)) = ht * ht * std::sqrt(s);
  });
  return eta;
}

JumpIndicators eta_jumps(const DGField& field, const EllipticCoeffs& coeffs,
                         const ScalarFn& boundary) {
  const TriMesh& mesh = field.mesh();
  const int m = field.degree();
  const double mu = coeffs.penalty(m);
  const QuadRule& rule = edge_rule(error_degree(m));
  JumpIndicators out;
  out.eta2.resize(static_cast<Eigen::Index>(mesh.num_edges()));
  out.eta3.resize(static_cast<Eigen::Index>(mesh.num_edges()));
  parallel_for(mesh.num_edges(), [&](std::size_t e) {
    const Edge& edge = mesh.edge(e);
    double jump2 = 0.0, flux2 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = mesh.edge_point(e, rule.points[q].x());
      const double w = rule.weights[q] * edge.length;
      const double v0 = field.value(edge.elements[0], x);
      if (edge.is_boundary()) {
        const double d = v0 - (boundary ? boundary(x) : 0.0);
        jump2 += w * d * d;
        continue;
      }
      const double d = v0 - field.value(edge.elements[1], x);
      jump2 += w * d * d;
      const Eigen::Matrix2d a = coeffs.eval_A(x);
      const double fj = (a * (field.gradient(edge.elements[0], x) -
                              field.gradient(edge.elements[1], x)))
                            .dot(edge.normals[0]);
      flux2 += w * fj * fj;
    }
    const double ht = edge.length / mu;
    out.eta2(static_cast<Eigen::Index>(e)) = std::sqrt(ht * jump2);
    out.eta3(static_cast<Eigen::Index>(e)) = std::sqrt(ht * ht * ht * flux2);
  });
  return out;
}

ControlIndicator eta_control(const OcpDiscretization& disc, const Vector& u, const DGField& p,
                             ControlEstimate mode, double bound_tol) {
  const auto* space = dynamic_cast<const PiecewiseConstantSpace*>(&disc.space());
  if (!space) throw InvalidArgument("eta_control: requires a piecewise-constant control");
  const ProblemSpec& spec = disc.spec();
  const AdmissibleSet& set = spec.admissible;
  if (mode == ControlEstimate::Sharp && !set.pointwise())
    throw InvalidArgument("eta_control: sharp mode requires a lower-bound or box constraint");
  const ControlMesh& cm = space->control_mesh();
  const std::size_t nc = cm.num_elements();
  const double cb = spec.c_B;
  const QuadRule& rule = triangle_rule(std::max(4, 2 * p.degree() + 2));

  ControlIndicator out;
  out.eta0_elements = Vector::Zero(static_cast<Eigen::Index>(nc));
  Vector general(static_cast<Eigen::Index>(nc));
  Vector sharp = Vector::Zero(static_cast<Eigen::Index>(nc));
  Vector star = Vector::Zero(static_cast<Eigen::Index>(nc));
  const bool with_star = mode == ControlEstimate::Sharp && spec.exact && spec.exact->u && spec.exact->p;
  if (mode == ControlEstimate::Sharp) out.labels.assign(nc, ActiveLabel::Inactive);

  parallel_for(nc, [&](std::size_t c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const double uc = u(ci);
    std::vector<Point> pts;
    std::vector<double> wts;
    std::vector<double> vals, wall, svals;
    space->for_each_piece(c, [&](std::size_t k, const std::array<Point, 3>& tri) {
      map_triangle_rule(rule, tri, pts, wts);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        vals.push_back(spec.j_prime(pts[q], uc) + cb * p.value(k, pts[q]));
        wall.push_back(wts[q]);
        if (with_star)
          svals.push_back(spec.j_prime(pts[q], spec.exact->u(pts[q])) + cb * spec.exact->p(pts[q]));
      }
    });
    double area = 0.0, mean = 0.0, smean = 0.0;
    for (std::size_t q = 0; q < vals.size(); ++q) {
      area += wall[q];
      mean += wall[q] * vals[q];
      if (with_star) smean += wall[q] * svals[q];
    }
    mean /= area;
    smean /= area;
    double g = 0.0;
    for (std::size_t q = 0; q < vals.size(); ++q) g += wall[q] * (vals[q] - mean) * (vals[q] - mean);
    general(ci) = g;
    if (mode != ControlEstimate::Sharp) return;

    const bool at_lower = uc <= set.lower + bound_tol;
    const bool at_upper = set.kind == AdmissibleKind::Box && uc >= set.upper - bound_tol;
    double s = 0.0;
    bool all_signed = at_lower || at_upper;
    for (std::size_t q = 0; q < vals.size(); ++q) {
      const bool sign_ok = (at_lower && vals[q] >= 0.0) || (at_upper && vals[q] <= 0.0);
      if (!sign_ok) {
        s += wall[q] * vals[q] * vals[q];
        all_signed = false;
      }
    }
    sharp(ci) = s;
    if (at_lower || at_upper)
      out.labels[c] = all_signed ? ActiveLabel::ActiveSigned : ActiveLabel::Active;
    else if (with_star) {
      double st = 0.0;
      for (std::size_t q = 0; q < svals.size(); ++q)
        st += wall[q] * (svals[q] - smean) * (svals[q] - smean);
      star(ci) = st;
    }
  });

  out.eta0 = std::sqrt(general.sum());
  if (mode == ControlEstimate::Sharp) {
    out.eta0_sharp = std::sqrt(sharp.sum());
    out.eta_star = with_star ? std::sqrt(star.sum()) : kNaN;
    out.eta0_elements = sharp;
  } else {
    out.eta0_sharp = kNaN;
    out.eta_star = kNaN;
    out.eta0_elements = general;
  }
  return out;
}

double IndicatorReport::total(ControlEstimate mode) const {
  const double c = has_control ? (mode == ControlEstimate::Sharp ? control.eta0_sharp : control.eta0)
                               : 0.0;
  return std::sqrt(c * c + eta1_y.squaredNorm() + jumps_y.eta2.squaredNorm() +
                   jumps_y.eta3.squaredNorm() + eta1_p.squaredNorm() + jumps_p.eta2.squaredNorm() +
                   jumps_p.eta3.squaredNorm());
}

IndicatorReport compute_indicators(const OcpDiscretization& disc, const OcpSolution& sol,
                                   ControlEstimate mode) {
  const ProblemSpec& spec = disc.spec();
  const ControlSpace& space = disc.space();
  IndicatorReport rep;
  const bool sampled = space.mode() == ControlMode::QuadSampled;
  const int qdeg = sampled ? dynamic_cast<const QuadSampledSpace&>(space).quad_degree() : -1;

  const VolumeSource y_source =
      add_sources(as_source(spec.coeffs.f), control_source(space, sol.u.values));
  rep.eta1_y = eta_volume(sol.y, y_source, spec.coeffs, qdeg);
  rep.eta1_p = eta_volume(sol.p, sol.y.compose(spec.g_prime), spec.coeffs, qdeg);
  rep.jumps_y = eta_jumps(sol.y, spec.coeffs, spec.coeffs.phi);
  rep.jumps_p = eta_jumps(sol.p, spec.coeffs);
  if (!sampled) {
    rep.control = eta_control(disc, sol.u.values, sol.p, mode);
    rep.has_control = true;
  }
  return rep;
}

// recovery

double RecoveredControl::value(std::size_t c, const Point& x) const {
  const auto v = mesh->element_vertices(c);
  const auto nodes = mesh->element_nodes(c);
  const Point e1 = v[1] - v[0];
  const Point e2 = v[2] - v[0];
  const Point d = x - v[0];
  const double det = e1.x() * e2.y() - e1.y() * e2.x();
  const double l1 = (d.x() * e2.y() - d.y() * e2.x()) / det;
  const double l2 = (e1.x() * d.y() - e1.y() * d.x()) / det;
  return (1.0 - l1 - l2) * nodal(static_cast<Eigen::Index>(nodes[0])) +
         l1 * nodal(static_cast<Eigen::Index>(nodes[1])) +
         l2 * nodal(static_cast<Eigen::Index>(nodes[2]));
}

double RecoveredControl::l2_error(const ScalarFn& f, int quad_degree, int subdivisions) const {
  if (subdivisions < 1) throw InvalidArgument("l2_error: subdivisions must be >= 1");
  const QuadRule& rule = triangle_rule(quad_degree);
  const std::size_t nc = mesh->num_elements();
  const int s = subdivisions;
  Vector part(static_cast<Eigen::Index>(nc));
  parallel_for(nc, [&](std::size_t c) {
    const auto v = mesh->element_vertices(c);
    const auto at = [&](int i, int j) -> Point {
      return v[0] + (static_cast<double>(i) / s) * (v[1] - v[0]) +
             (static_cast<double>(j) / s) * (v[2] - v[0]);
    };
    std::vector<Point> pts;
    std::vector<double> wts;
    double sum = 0.0;
    const auto accumulate = [&](const std::array<Point, 3>& tri) {
      map_triangle_rule(rule, tri, pts, wts);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const double d = f(pts[q]) - value(c, pts[q]);
        sum += wts[q] * d * d;
      }
    };
    for (int j = 0; j < s; ++j)
      for (int i = 0; i + j < s; ++i) {
        accumulate({at(i, j), at(i + 1, j), at(i, j + 1)});
        if (i + j + 1 < s) accumulate({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
      }
    part(static_cast<Eigen::Index>(c)) = sum;
  });
  return std::sqrt(part.sum());
}

namespace {

// Solves the area-weighted normal equations in coordinates centred at z; returns false when
// the 3x3 system is numerically singular.
bool fit_affine(const ControlMesh& mesh, const Vector& u, const std::vector<std::size_t>& elems,
                const Point& z, double& value) {
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  const double area = mesh.element_area();
  const double scale = mesh.spacing();
  for (const std::size_t c : elems) {
    const Point xb = (mesh.barycenter(c) - z) / scale;
    const Eigen::Vector3d row(1.0, xb.x(), xb.y());
    a += area * row * row.transpose();
    b += area * u(static_cast<Eigen::Index>(c)) * row;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(a);
  const Eigen::Vector3d ev = eig.eigenvalues();
  if (ev(0) <= 1e-10 * ev(2)) return false;
  const Eigen::Matrix3d& q = eig.eigenvectors();
  value = (q * (q.transpose() * b).cwiseQuotient(ev))(0);
  return true;
}

}  // namespace

RecoveredControl zz_recover(std::shared_ptr<const ControlMesh> mesh, const Vector& u) {
  if (!mesh) throw InvalidArgument("zz_recover: null mesh");
  if (u.size() != static_cast<Eigen::Index>(mesh->num_elements()))
    throw InvalidArgument("zz_recover: one value per control element expected");
  RecoveredControl rc;
  rc.mesh = mesh;
  const std::size_t nn = mesh->num_nodes();
  rc.nodal.resize(static_cast<Eigen::Index>(nn));
  rc.fallback.assign(nn, 0);
  parallel_for(nn, [&](std::size_t i) {
    const Point z = mesh->node(i);
    const std::vector<std::size_t> ring = mesh->node_elements(i);
    double v = 0.0;
    if (!fit_affine(*mesh, u, ring, z, v)) {
      rc.fallback[i] = 1;
      std::set<std::size_t> second;
      for (const std::size_t c : ring)
        for (const std::size_t node : mesh->element_nodes(c))
          for (const std::size_t c2 : mesh->node_elements(node)) second.insert(c2);
      const std::vector<std::size_t> ring2(second.begin(), second.end());
      if (!fit_affine(*mesh, u, ring2, z, v)) {
        // a single-square mesh: fall back to the area-weighted mean
        double s = 0.0;
        for (const std::size_t c : ring2) s += u(static_cast<Eigen::Index>(c));
        v = s / static_cast<double>(ring2.size());
      }
    }
    rc.nodal(static_cast<Eigen::Index>(i)) = v;
  });
  return rc;
}

// effectivity

double EffectivityReport::min_positive(const Vector& v) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) > 0.0) best = std::min(best, v(i));
  return std::isfinite(best) ? best : 0.0;
}

EffectivityReport effectivity(const OcpDiscretization& disc, const OcpSolution& sol,
                              const IndicatorReport& report) {
  const ProblemSpec& spec = disc.spec();
  if (!spec.exact || !spec.exact->y || !spec.exact->p || !spec.exact->u)
    throw InvalidArgument("effectivity: exact solution required");
  const TriMesh& mesh = sol.y.mesh();
  const std::size_t ne = mesh.num_elements();
  EffectivityReport out;
  out.err_y = l2_error_elementwise(sol.y, spec.exact->y);
  out.err_p = l2_error_elementwise(sol.p, spec.exact->p);
  out.e_y.resize(static_cast<Eigen::Index>(ne));
  out.e_p.resize(static_cast<Eigen::Index>(ne));
  for (std::size_t k = 0; k < ne; ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    double ny = report.eta1_y(ki) * report.eta1_y(ki);
    double np = report.eta1_p(ki) * report.eta1_p(ki);
    for (const std::size_t e : mesh.element(k).edges) {
      const auto ei = static_cast<Eigen::Index>(e);
      ny += report.jumps_y.eta2(ei) * report.jumps_y.eta2(ei);
      np += report.jumps_p.eta2(ei) * report.jumps_p.eta2(ei);
      if (!mesh.edge(e).is_boundary()) {
        ny += report.jumps_y.eta3(ei) * report.jumps_y.eta3(ei);
        np += report.jumps_p.eta3(ei) * report.jumps_p.eta3(ei);
      }
    }
    out.e_y(ki) = out.err_y(ki) > 0.0 ? std::sqrt(ny / out.err_y(ki)) : 0.0;
    out.e_p(ki) = out.err_p(ki) > 0.0 ? std::sqrt(np / out.err_p(ki)) : 0.0;
  }

  const auto* space = dynamic_cast<const PiecewiseConstantSpace*>(&disc.space());
  if (!space) return out;
  const ControlMesh& cm = space->control_mesh();
  const std::size_t nc = cm.num_elements();
  const QuadRule& rule = triangle_rule(std::max(4, 2 * sol.p.degree() + 2));
  out.e_u.resize(static_cast<Eigen::Index>(nc));
  out.err_u.resize(static_cast<Eigen::Index>(nc));
  const Vector& u = sol.u.values;
  parallel_for(nc, [&](std::size_t c) {
    const auto ci = static_cast<Eigen::Index>(c);
    double num = 0.0, den = 0.0;
    std::vector<Point> pts;
    std::vector<double> wts;
    space->for_each_piece(c, [&](std::size_t k, const std::array<Point, 3>& tri) {
      map_triangle_rule(rule, tri, pts, wts);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const double g = spec.j_prime(pts[q], u(ci)) + spec.c_B * sol.p.value(k, pts[q]);
        const double d = spec.exact->u(pts[q]) - u(ci);
        num += wts[q] * g * g;
        den += wts[q] * d * d;
      }
    });
    out.err_u(ci) = den;
    out.e_u(ci) = den > 0.0 ? std::sqrt(num / den) : 0.0;
  });
  return out;
}

}  // namespace rdaocp
