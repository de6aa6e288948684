#include "rdaocp/ipdg.hpp"

#include <algorithm>
#include <cmath>

namespace rdaocp {

VolumeSource as_source(ScalarFn f) {
  if (!f) return zero_source();
  return [f = std::move(f)](std::size_t, std::span<const Point> pts, std::span<double> out) {
    for (std::size_t q = 0; q < pts.size(); ++q) out[q] = f(pts[q]);
  };
}

VolumeSource zero_source() {
  return [](std::size_t, std::span<const Point>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
}

VolumeSource add_sources(VolumeSource a, VolumeSource b) {
  return [a = std::move(a), b = std::move(b)](std::size_t k, std::span<const Point> pts,
                                               std::span<double> out) {
    std::vector<double> tmp(pts.size());
    a(k, pts, out);
    b(k, pts, tmp);
    for (std::size_t q = 0; q < pts.size(); ++q) out[q] += tmp[q];
  };
}

Eigen::Matrix2d EllipticCoeffs::eval_A(const Point& x) const {
  return A ? A(x) : Eigen::Matrix2d::Identity();
}

MatrixGradient EllipticCoeffs::eval_grad_A(const Point& x) const {
  return grad_A ? grad_A(x) : MatrixGradient{};
}

// DGField

DGField::DGField(std::shared_ptr<const ReconstructionMatrix> r, Vector w)
    : r_(std::move(r)), w_(std::move(w)) {
  if (!r_) throw InvalidArgument("DGField: null reconstruction");
  coeffs_ = r_->apply(w_);
}

double DGField::value(std::size_t k, const Point& x) const {
  const LocalBasis& b = r_->basis(k);
  std::array<double, 128> phi{};
  b.values(x, std::span<double>(phi.data(), b.dim()));
  const auto c = element_coefficients(k);
  double v = 0.0;
  for (int a = 0; a < b.dim(); ++a) v += c[a] * phi[a];
  return v;
}

Point DGField::gradient(std::size_t k, const Point& x) const {
  const LocalBasis& b = r_->basis(k);
  std::array<double, 128> gx{}, gy{};
  b.gradients(x, std::span<double>(gx.data(), b.dim()), std::span<double>(gy.data(), b.dim()));
  const auto c = element_coefficients(k);
  Point g = Point::Zero();
  for (int a = 0; a < b.dim(); ++a) g += c[a] * Point(gx[a], gy[a]);
  return g;
}

Eigen::Vector3d DGField::hessian(std::size_t k, const Point& x) const {
  const LocalBasis& b = r_->basis(k);
  std::array<double, 128> hxx{}, hxy{}, hyy{};
  b.hessians(x, std::span<double>(hxx.data(), b.dim()), std::span<double>(hxy.data(), b.dim()),
             std::span<double>(hyy.data(), b.dim()));
  const auto c = element_coefficients(k);
  Eigen::Vector3d h = Eigen::Vector3d::Zero();
  for (int a = 0; a < b.dim(); ++a) h += c[a] * Eigen::Vector3d(hxx[a], hxy[a], hyy[a]);
  return h;
}

namespace {

bool inside(const std::array<Point, 3>& t, const Point& x, double tol) {
  const auto cross = [](const Point& a, const Point& b, const Point& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  };
  return cross(t[0], t[1], x) >= -tol && cross(t[1], t[2], x) >= -tol &&
         cross(t[2], t[0], x) >= -tol;
}

}  // namespace

double DGField::value_at(const Point& x) const {
  const TriMesh& m = mesh();
  if (m.grid()) return value(m.grid()->locate(x), x);
  for (std::size_t k = 0; k < m.num_elements(); ++k)
    if (inside(m.element_vertices(k), x, 1e-14)) return value(k, x);
  throw InvalidArgument("DGField::value_at: point outside the mesh");
}

VolumeSource DGField::compose(std::function<double(const Point&, double)> g) const {
  return [field = *this, g = std::move(g)](std::size_t k, std::span<const Point> pts,
                                            std::span<double> out) {
    for (std::size_t q = 0; q < pts.size(); ++q) out[q] = g(pts[q], field.value(k, pts[q]));
  };
}

// assembly

namespace {

struct ElementQuad {
  std::vector<Point> points;
  std::vector<double> weights;
  BasisTable table;
};

ElementQuad element_quad(const ReconstructionMatrix& r, std::size_t k, int degree, int order) {
  ElementQuad eq;
  map_triangle_rule(triangle_rule(degree), r.mesh().element_vertices(k), eq.points, eq.weights);
  eq.table = eval_basis(r.basis(k), eq.points, order);
  return eq;
}

struct EdgeQuad {
  std::vector<Point> points;
  std::vector<double> weights;  // scaled by the edge length
};

EdgeQuad edge_quad(const TriMesh& mesh, std::size_t e, int degree) {
  const QuadRule& rule = edge_rule(degree);
  EdgeQuad eq;
  const double len = mesh.edge(e).length;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    eq.points.push_back(mesh.edge_point(e, rule.points[q].x()));
    eq.weights.push_back(rule.weights[q] * len);
  }
  return eq;
}

// Values of the signed jump basis and normal flux basis of the two sides of an edge,
// stacked as [side 0 functions, side 1 functions].
struct EdgeTrace {
  Eigen::MatrixXd jump;  // points x dofs: sigma_i phi_i
  Eigen::MatrixXd flux;  // points x dofs: weight_i (A grad phi_i) . n0
  std::vector<std::size_t> elements;
};

EdgeTrace edge_trace(const ReconstructionMatrix& r, const EllipticCoeffs& coeffs, std::size_t e,
                     const EdgeQuad& eq) {
  const Edge& edge = r.mesh().edge(e);
  const int dim = r.dim();
  const int sides = edge.is_boundary() ? 1 : 2;
  const double avg = edge.is_boundary() ? 1.0 : 0.5;
  const auto np = static_cast<Eigen::Index>(eq.points.size());
  EdgeTrace tr;
  tr.jump.resize(np, sides * dim);
  tr.flux.resize(np, sides * dim);
  const Point n0 = edge.normals[0];
  for (int s = 0; s < sides; ++s) {
    const std::size_t k = edge.elements[s];
    tr.elements.push_back(k);
    const BasisTable t = eval_basis(r.basis(k), eq.points, 1);
    const double sigma = s == 0 ? 1.0 : -1.0;
    for (Eigen::Index q = 0; q < np; ++q) {
      const Eigen::Matrix2d a = coeffs.eval_A(eq.points[q]);
      const Point an = a * n0;  // A symmetric: (A grad phi).n = grad phi . (A n)
      for (int i = 0; i < dim; ++i) {
        tr.jump(q, s * dim + i) = sigma * t.values(q, i);
        tr.flux(q, s * dim + i) = avg * (t.dx(q, i) * an.x() + t.dy(q, i) * an.y());
      }
    }
  }
  return tr;
}

}  // namespace

SparseMatrix assemble_broken_stiffness(const ReconstructionMatrix& r, const EllipticCoeffs& coeffs) {
  const TriMesh& mesh = r.mesh();
  const int m = r.degree();
  const int dim = r.dim();
  const int qdeg = assembly_degree(m);
  const double mu = coeffs.penalty(m);
  if (!(mu > 0.0)) throw InvalidArgument("assemble_stiffness: penalty must be positive");

  std::vector<Eigen::MatrixXd> vol(mesh.num_elements());
  parallel_for(mesh.num_elements(), [&](std::size_t k) {
    const ElementQuad eq = element_quad(r, k, qdeg, 1);
    Eigen::MatrixXd& blk = vol[k];
    blk.setZero(dim, dim);
    for (std::size_t q = 0; q < eq.points.size(); ++q) {
      const Eigen::Matrix2d a = coeffs.eval_A(eq.points[q]);
      const auto qi = static_cast<Eigen::Index>(q);
      Eigen::MatrixXd g(2, dim);
      g.row(0) = eq.table.dx.row(qi);
      g.row(1) = eq.table.dy.row(qi);
      blk.noalias() += eq.weights[q] * (g.transpose() * a * g);
    }
    blk = 0.5 * (blk + blk.transpose()).eval();
  });

  std::vector<Eigen::MatrixXd> face(mesh.num_edges());
  parallel_for(mesh.num_edges(), [&](std::size_t e) {
    const EdgeQuad eq = edge_quad(mesh, e, qdeg);
    const EdgeTrace tr = edge_trace(r, coeffs, e, eq);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(eq.weights.data(),
                                                                static_cast<Eigen::Index>(eq.weights.size()));
    const Eigen::MatrixXd c = tr.jump.transpose() * w.asDiagonal() * tr.flux;  // (test, trial)
    const Eigen::MatrixXd p = tr.jump.transpose() * w.asDiagonal() * tr.jump;
    const double he = mesh.edge(e).length;
    Eigen::MatrixXd blk = -(c + c.transpose()) + (mu / he) * p;
    face[e] = 0.5 * (blk + blk.transpose());
  });

  std::vector<Triplet> entries;
  entries.reserve(mesh.num_elements() * dim * dim + mesh.num_edges() * 4 * dim * dim);
  for (std::size_t k = 0; k < mesh.num_elements(); ++k)
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        entries.emplace_back(static_cast<int>(k * dim + i), static_cast<int>(k * dim + j), vol[k](i, j));
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    const int sides = edge.is_boundary() ? 1 : 2;
    for (int si = 0; si < sides; ++si)
      for (int sj = 0; sj < sides; ++sj)
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j)
            entries.emplace_back(static_cast<int>(edge.elements[si] * dim + i),
                                 static_cast<int>(edge.elements[sj] * dim + j),
                                 face[e](si * dim + i, sj * dim + j));
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_elements() * dim);
  return from_triplets(n, n, entries);
}

SparseMatrix assemble_stiffness(const ReconstructionMatrix& r, const EllipticCoeffs& coeffs) {
  return triple_product(r.matrix(), assemble_broken_stiffness(r, coeffs));
}

Vector assemble_broken_load(const ReconstructionMatrix& r, const EllipticCoeffs& coeffs,
                            const VolumeSource& source, const ScalarFn& boundary) {
  const TriMesh& mesh = r.mesh();
  const int m = r.degree();
  const int dim = r.dim();
  const int qdeg = assembly_degree(m);
  const double mu = coeffs.penalty(m);
  Vector b = Vector::Zero(static_cast<Eigen::Index>(mesh.num_elements() * dim));

  if (source) {
    parallel_for(mesh.num_elements(), [&](std::size_t k) {
      const ElementQuad eq = element_quad(r, k, qdeg, 0);
      std::vector<double> f(eq.points.size());
      source(k, eq.points, f);
      for (std::size_t q = 0; q < eq.points.size(); ++q)
        b.segment(static_cast<Eigen::Index>(k * dim), dim) +=
            (eq.weights[q] * f[q]) * eq.table.values.row(static_cast<Eigen::Index>(q)).transpose();
    });
  }

  if (boundary) {
    // boundary edges belong to distinct elements on conforming meshes, except at
    // corners where one element owns two edges; accumulate serially
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      const Edge& edge = mesh.edge(e);
      if (!edge.is_boundary()) continue;
      const EdgeQuad eq = edge_quad(mesh, e, qdeg);
      const EdgeTrace tr = edge_trace(r, coeffs, e, eq);
      const std::size_t k = edge.elements[0];
      for (std::size_t q = 0; q < eq.points.size(); ++q) {
        const double g = boundary(eq.points[q]) * eq.weights[q];
        const auto qi = static_cast<Eigen::Index>(q);
        for (int i = 0; i < dim; ++i)
          b(static_cast<Eigen::Index>(k * dim + i)) +=
              g * (-tr.flux(qi, i) + (mu / edge.length) * tr.jump(qi, i));
      }
    }
  }
  return b;
}

Vector assemble_load(const ReconstructionMatrix& r, const EllipticCoeffs& coeffs,
                     const VolumeSource& source, const ScalarFn& boundary) {
  return r.matrix().transpose() * assemble_broken_load(r, coeffs, source, boundary);
}

// solver

EllipticSolver::EllipticSolver(std::shared_ptr<const ReconstructionMatrix> r, EllipticCoeffs coeffs,
                               const SolveOptions& options)
    : r_(std::move(r)),
      coeffs_(std::move(coeffs)),
      solver_(assemble_stiffness(*r_, coeffs_), options) {}

Vector EllipticSolver::load(const VolumeSource& source, const ScalarFn& boundary) const {
  return assemble_load(*r_, coeffs_, source, boundary);
}

DGField EllipticSolver::solve_rhs(const Vector& rhs, SolveStats* stats) const {
  return DGField(r_, solver_.solve(rhs, stats));
}

DGField EllipticSolver::solve(const VolumeSource& source, const ScalarFn& boundary,
                              SolveStats* stats) const {
  return solve_rhs(load(source, boundary), stats);
}

DGField solve_elliptic(std::shared_ptr<const ReconstructionMatrix> r, const EllipticCoeffs& coeffs,
                       const VolumeSource& source, const ScalarFn& boundary) {
  return EllipticSolver(std::move(r), coeffs).solve(source, boundary);
}

// norms

double dg_norm(const DGField& field, const ExactFunction& exact, double mu, DGNorm variant,
               int quad_degree) {
  const TriMesh& mesh = field.mesh();
  const int qdeg = quad_degree > 0 ? quad_degree : error_degree(field.degree());
  if (!(mu > 0.0)) throw InvalidArgument("dg_norm: penalty must be positive");
  const auto exact_grad = [&](const Point& x) {
    return exact.gradient ? exact.gradient(x) : Point(Point::Zero());
  };
  const auto exact_val = [&](const Point& x) { return exact.value ? exact.value(x) : 0.0; };

  std::vector<double> vol(mesh.num_elements(), 0.0);
  parallel_for(mesh.num_elements(), [&](std::size_t k) {
    std::vector<Point> pts;
    std::vector<double> wts;
    map_triangle_rule(triangle_rule(qdeg), mesh.element_vertices(k), pts, wts);
    double s = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q)
      s += wts[q] * (field.gradient(k, pts[q]) - exact_grad(pts[q])).squaredNorm();
    vol[k] = s;
  });

  std::vector<double> face(mesh.num_edges(), 0.0);
  parallel_for(mesh.num_edges(), [&](std::size_t e) {
    const Edge& edge = mesh.edge(e);
    const EdgeQuad eq = edge_quad(mesh, e, qdeg);
    const double he = edge.length;
    double s = 0.0;
    for (std::size_t q = 0; q < eq.points.size(); ++q) {
      const Point& x = eq.points[q];
      const double d0 = field.value(edge.elements[0], x) - exact_val(x);
      const Point g0 = field.gradient(edge.elements[0], x) - exact_grad(x);
      double jump = d0;
      Point avg = g0;
      if (!edge.is_boundary()) {
        const double d1 = field.value(edge.elements[1], x) - exact_val(x);
        const Point g1 = field.gradient(edge.elements[1], x) - exact_grad(x);
        jump = d0 - d1;
        avg = 0.5 * (g0 + g1);
      }
      s += eq.weights[q] * (mu / he) * jump * jump;
      if (variant == DGNorm::Triple) s += eq.weights[q] * (he / mu) * avg.squaredNorm();
    }
    face[e] = s;
  });

  double total = 0.0;
  for (const double v : vol) total += v;
  for (const double v : face) total += v;
  return std::sqrt(total);
}

Vector l2_error_elementwise(const DGField& field, const ScalarFn& exact, int quad_degree) {
  const TriMesh& mesh = field.mesh();
  const int qdeg = quad_degree > 0 ? quad_degree : error_degree(field.degree());
  Vector err(static_cast<Eigen::Index>(mesh.num_elements()));
  parallel_for(mesh.num_elements(), [&](std::size_t k) {
    std::vector<Point> pts;
    std::vector<double> wts;
    map_triangle_rule(triangle_rule(qdeg), mesh.element_vertices(k), pts, wts);
    double s = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double d = (exact ? exact(pts[q]) : 0.0) - field.value(k, pts[q]);
      s += wts[q] * d * d;
    }
    err(static_cast<Eigen::Index>(k)) = s;
  });
  return err;
}

double l2_error(const DGField& field, const ScalarFn& exact, int quad_degree) {
  return std::sqrt(l2_error_elementwise(field, exact, quad_degree).sum());
}

Vector sample_barycenters(const TriMesh& mesh, const ScalarFn& f) {
  Vector w(static_cast<Eigen::Index>(mesh.num_elements()));
  for (std::size_t k = 0; k < mesh.num_elements(); ++k)
    w(static_cast<Eigen::Index>(k)) = f(mesh.element(k).barycenter);
  return w;
}

}  // namespace rdaocp
