#include "rdaocp/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rdaocp {

void AdmissibleSet::validate() const {
  if (!std::isfinite(lower) || !std::isfinite(upper))
    throw InvalidArgument("admissible set: bounds must be finite");
  if (kind == AdmissibleKind::Box && !(lower < upper)) {
    std::ostringstream msg;
    msg << "admissible set: box requires lower < upper (got " << lower << ", " << upper << ")";
    throw InvalidArgument(msg.str());
  }
}

double AdmissibleSet::clamp(double v) const {
  switch (kind) {
    case AdmissibleKind::LowerBound:
      return std::max(v, lower);
    case AdmissibleKind::Box:
      return std::min(std::max(v, lower), upper);
    default:
      return v;
  }
}

std::string to_string(AdmissibleKind kind) {
  switch (kind) {
    case AdmissibleKind::Unconstrained:
      return "unconstrained";
    case AdmissibleKind::LowerBound:
      return "lower_bound";
    case AdmissibleKind::Box:
      return "box";
    case AdmissibleKind::IntegralLowerBound:
      return "integral_lower_bound";
  }
  return "unknown";
}

void ProblemSpec::validate() const {
  admissible.validate();
  if (!g_prime || !j_prime) throw InvalidArgument("problem: g' and j' callbacks are required");
  if (!(alpha > 0.0)) throw InvalidArgument("problem: convexity constant alpha must be positive");
  if (beta < 0.0) throw InvalidArgument("problem: convexity constant beta must be nonnegative");
  if (!std::isfinite(c_B) || c_B == 0.0) throw InvalidArgument("problem: c_B must be nonzero");
  if (coeffs.mu < 0.0) throw InvalidArgument("problem: penalty must be positive");
}

// ControlMesh

ControlMesh::ControlMesh(std::size_t n, const Rectangle& domain) : grid_{n, domain} {
  if (n == 0) throw InvalidArgument("ControlMesh: n must be at least 1");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
    throw InvalidArgument("ControlMesh: degenerate rectangle");
}

std::array<std::size_t, 3> ControlMesh::element_nodes(std::size_t c) const {
  const std::size_t n = grid_.n;
  const std::size_t s = c / 2;
  const std::size_t i = s % n;
  const std::size_t j = s / n;
  const auto id = [n](std::size_t a, std::size_t b) { return b * (n + 1) + a; };
  if (c % 2 == 0) return {id(i, j), id(i + 1, j), id(i + 1, j + 1)};
  return {id(i, j), id(i + 1, j + 1), id(i, j + 1)};
}

Point ControlMesh::barycenter(std::size_t c) const {
  const auto v = element_vertices(c);
  return (v[0] + v[1] + v[2]) / 3.0;
}

Point ControlMesh::node(std::size_t idx) const {
  const std::size_t n = grid_.n;
  const std::size_t i = idx % (n + 1);
  const std::size_t j = idx / (n + 1);
  const double x = i == n ? grid_.domain.x1 : grid_.domain.x0 + static_cast<double>(i) * grid_.dx();
  const double y = j == n ? grid_.domain.y1 : grid_.domain.y0 + static_cast<double>(j) * grid_.dy();
  return {x, y};
}

std::vector<std::size_t> ControlMesh::node_elements(std::size_t idx) const {
  const auto n = static_cast<long>(grid_.n);
  const auto i = static_cast<long>(idx % (grid_.n + 1));
  const auto j = static_cast<long>(idx / (grid_.n + 1));
  std::vector<std::size_t> out;
  const auto add = [&](long si, long sj, int type) {
    if (si < 0 || sj < 0 || si >= n || sj >= n) return;
    out.push_back(static_cast<std::size_t>(2 * (sj * n + si) + type));
  };
  // square below-left holds the node as its (i+1, j+1) corner, etc.
  add(i - 1, j - 1, 0);
  add(i - 1, j - 1, 1);
  add(i, j - 1, 1);
  add(i - 1, j, 0);
  add(i, j, 0);
  add(i, j, 1);
  std::sort(out.begin(), out.end());
  return out;
}

Vector element_means(const ControlMesh& mesh, const ScalarFn& f, int degree) {
  Vector out(static_cast<Eigen::Index>(mesh.num_elements()));
  const QuadRule& rule = triangle_rule(degree);
  parallel_for(mesh.num_elements(), [&](std::size_t c) {
    std::vector<Point> pts;
    std::vector<double> wts;
    map_triangle_rule(rule, mesh.element_vertices(c), pts, wts);
    double s = 0.0, a = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      s += wts[q] * f(pts[q]);
      a += wts[q];
    }
    out(static_cast<Eigen::Index>(c)) = s / a;
  });
  return out;
}

// ControlSpace

ControlSpace::ControlSpace(std::shared_ptr<const ReconstructionMatrix> r, double c_B)
    : r_(std::move(r)), c_B_(c_B) {
  if (!r_) throw InvalidArgument("control space: null reconstruction");
}

double ControlSpace::norm(const Vector& u) const {
  return std::sqrt(weights().dot(u.cwiseProduct(u)));
}

// PiecewiseConstantSpace

namespace {

constexpr int kControlQuadDegree = 4;

// Type of the sub-triangle (a, b, t) of a square refined r times, relative to the parent
// diagonal: 0 lies in the lower parent triangle, 1 in the upper.
int parent_type(std::size_t a, std::size_t b, int t) {
  if (a > b) return 0;
  if (a < b) return 1;
  return t;
}

}  // namespace

PiecewiseConstantSpace::PiecewiseConstantSpace(std::shared_ptr<const ReconstructionMatrix> r,
                                               std::shared_ptr<const ControlMesh> control,
                                               double c_B, JPrimeEval eval)
    : ControlSpace(std::move(r), c_B), control_(std::move(control)), eval_(eval) {
  if (!control_) throw InvalidArgument("control space: null control mesh");
  const TriMesh& mesh = r_->mesh();
  if (!mesh.grid())
    throw InvalidArgument("control space: state mesh must be a uniform grid for nested transfer");
  if (!(mesh.domain() == control_->domain()))
    throw InvalidArgument("control space: state and control domains differ");
  const std::size_t n = mesh.grid()->n;
  const std::size_t nu = control_->n();
  if (nu % n == 0) {
    control_finer_ = true;
    ratio_ = nu / n;
  } else if (n % nu == 0) {
    control_finer_ = false;
    ratio_ = n / nu;
  } else {
    std::ostringstream msg;
    msg << "control space: meshes are not nested (state n = " << n << ", control n_u = " << nu
        << "; one must divide the other)";
    throw InvalidArgument(msg.str());
  }
  weights_ = Vector::Constant(static_cast<Eigen::Index>(control_->num_elements()),
                              control_->element_area());

  // moments of the element basis over each piece of a reference state element per type
  const int dim = r_->dim();
  const QuadRule& rule = triangle_rule(std::max(r_->degree(), 1));
  std::vector<Piece> pieces;
  std::vector<Point> pts;
  std::vector<double> wts;
  std::vector<double> phi(dim);
  for (int st = 0; st < 2; ++st) {
    const std::size_t kref = static_cast<std::size_t>(st);
    Eigen::MatrixXd& table = moments_[st];
    table.setZero(control_finer_ ? static_cast<Eigen::Index>(2 * ratio_ * ratio_) : 1, dim);
    if (control_finer_) {
      pieces.clear();
      pieces_of_coarse(kref, pieces);
      for (const Piece& pc : pieces) {
        map_triangle_rule(rule, control_->element_vertices(pc.control), pts, wts);
        for (std::size_t q = 0; q < pts.size(); ++q) {
          r_->basis(kref).values(pts[q], phi);
          for (int a = 0; a < dim; ++a)
            table(static_cast<Eigen::Index>(pc.local), a) += wts[q] * phi[a];
        }
      }
    } else {
      map_triangle_rule(rule, mesh.element_vertices(kref), pts, wts);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        r_->basis(kref).values(pts[q], phi);
        for (int a = 0; a < dim; ++a) table(0, a) += wts[q] * phi[a];
      }
    }
  }
}

void PiecewiseConstantSpace::pieces_of_coarse(std::size_t coarse, std::vector<Piece>& out) const {
  const std::size_t n = r_->mesh().grid()->n;
  const std::size_t nu = control_->n();
  const std::size_t r = ratio_;
  const std::size_t s = coarse / 2;
  const int type = static_cast<int>(coarse % 2);
  if (control_finer_) {
    // coarse is a state element; pieces are control elements
    const std::size_t i = s % n;
    const std::size_t j = s / n;
    for (std::size_t b = 0; b < r; ++b)
      for (std::size_t a = 0; a < r; ++a)
        for (int ct = 0; ct < 2; ++ct) {
          if (parent_type(a, b, ct) != type) continue;
          const std::size_t c = 2 * ((j * r + b) * nu + i * r + a) + static_cast<std::size_t>(ct);
          out.push_back({coarse, c, (b * r + a) * 2 + static_cast<std::size_t>(ct)});
        }
  } else {
    // coarse is a control element; pieces are state elements
    const std::size_t i = s % nu;
    const std::size_t j = s / nu;
    for (std::size_t b = 0; b < r; ++b)
      for (std::size_t a = 0; a < r; ++a)
        for (int st = 0; st < 2; ++st) {
          if (parent_type(a, b, st) != type) continue;
          const std::size_t k = 2 * ((j * r + b) * n + i * r + a) + static_cast<std::size_t>(st);
          out.push_back({k, coarse, 0});
        }
  }
}

std::size_t PiecewiseConstantSpace::piece_of_control(std::size_t c, std::size_t& local) const {
  // only valid when the control mesh is the finer one
  const std::size_t n = r_->mesh().grid()->n;
  const std::size_t nu = control_->n();
  const std::size_t r = ratio_;
  const std::size_t s = c / 2;
  const int ct = static_cast<int>(c % 2);
  const std::size_t ci = s % nu;
  const std::size_t cj = s / nu;
  const std::size_t a = ci % r;
  const std::size_t b = cj % r;
  const int st = parent_type(a, b, ct);
  local = (b * r + a) * 2 + static_cast<std::size_t>(ct);
  return 2 * ((cj / r) * n + ci / r) + static_cast<std::size_t>(st);
}

void PiecewiseConstantSpace::for_each_piece(
    std::size_t c, const std::function<void(std::size_t, const std::array<Point, 3>&)>& fn) const {
  if (control_finer_) {
    std::size_t local = 0;
    fn(piece_of_control(c, local), control_->element_vertices(c));
    return;
  }
  std::vector<Piece> pieces;
  pieces_of_coarse(c, pieces);
  for (const Piece& pc : pieces) fn(pc.state, r_->mesh().element_vertices(pc.state));
}

Vector PiecewiseConstantSpace::apply_B_broken(const Vector& u) const {
  if (u.size() != static_cast<Eigen::Index>(size()))
    throw InvalidArgument("apply_B: control vector has wrong size");
  const std::size_t ne = r_->num_elements();
  const int dim = r_->dim();
  Vector b = Vector::Zero(static_cast<Eigen::Index>(ne * dim));
  if (control_finer_) {
    parallel_for(ne, [&](std::size_t k) {
      std::vector<Piece> pieces;
      pieces_of_coarse(k, pieces);
      const Eigen::MatrixXd& table = moments_[k % 2];
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
      for (const Piece& pc : pieces)
        acc += u(static_cast<Eigen::Index>(pc.control)) *
               table.row(static_cast<Eigen::Index>(pc.local)).transpose();
      b.segment(static_cast<Eigen::Index>(k * dim), dim) = c_B_ * acc;
    });
  } else {
    const std::size_t nu = control_->n();
    const std::size_t n = r_->mesh().grid()->n;
    parallel_for(ne, [&](std::size_t k) {
      const std::size_t s = k / 2;
      const std::size_t i = s % n;
      const std::size_t j = s / n;
      const int ct = parent_type(i % ratio_, j % ratio_, static_cast<int>(k % 2));
      const std::size_t c = 2 * ((j / ratio_) * nu + i / ratio_) + static_cast<std::size_t>(ct);
      b.segment(static_cast<Eigen::Index>(k * dim), dim) =
          (c_B_ * u(static_cast<Eigen::Index>(c))) * moments_[k % 2].row(0).transpose();
    });
  }
  return b;
}

Vector PiecewiseConstantSpace::apply_B(const Vector& u) const {
  return r_->matrix().transpose() * apply_B_broken(u);
}

Vector PiecewiseConstantSpace::apply_B_star(const DGField& p) const {
  if (&p.reconstruction() != r_.get() && p.reconstruction().num_elements() != r_->num_elements())
    throw InvalidArgument("apply_B_star: field lives on a different state mesh");
  const std::size_t nc = size();
  const double inv_area = 1.0 / control_->element_area();
  Vector out(static_cast<Eigen::Index>(nc));
  if (control_finer_) {
    parallel_for(nc, [&](std::size_t c) {
      std::size_t local = 0;
      const std::size_t k = piece_of_control(c, local);
      const double v = moments_[k % 2].row(static_cast<Eigen::Index>(local)).dot(
          p.element_coefficients(k));
      out(static_cast<Eigen::Index>(c)) = c_B_ * v * inv_area;
    });
  } else {
    parallel_for(nc, [&](std::size_t c) {
      std::vector<Piece> pieces;
      pieces_of_coarse(c, pieces);
      double v = 0.0;
      for (const Piece& pc : pieces)
        v += moments_[pc.state % 2].row(0).dot(p.element_coefficients(pc.state));
      out(static_cast<Eigen::Index>(c)) = c_B_ * v * inv_area;
    });
  }
  return out;
}

Vector PiecewiseConstantSpace::j_prime(const Vector& u, const PointwiseFn& jp) const {
  const std::size_t nc = size();
  Vector out(static_cast<Eigen::Index>(nc));
  if (eval_ == JPrimeEval::Barycenter) {
    parallel_for(nc, [&](std::size_t c) {
      const auto ci = static_cast<Eigen::Index>(c);
      out(ci) = jp(control_->barycenter(c), u(ci));
    });
    return out;
  }
  const QuadRule& rule = triangle_rule(kControlQuadDegree);
  parallel_for(nc, [&](std::size_t c) {
    const auto ci = static_cast<Eigen::Index>(c);
    std::vector<Point> pts;
    std::vector<double> wts;
    map_triangle_rule(rule, control_->element_vertices(c), pts, wts);
    double s = 0.0, a = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      s += wts[q] * jp(pts[q], u(ci));
      a += wts[q];
    }
    out(ci) = s / a;
  });
  return out;
}

Vector PiecewiseConstantSpace::project(const ScalarFn& f) const {
  return element_means(*control_, f, kControlQuadDegree);
}

double PiecewiseConstantSpace::l2_error(const Vector& u, const ScalarFn& f) const {
  return std::sqrt(integrate(u, [&f](const Point& x, double v) {
    const double d = f(x) - v;
    return d * d;
  }));
}

double PiecewiseConstantSpace::integrate(const Vector& u, const PointwiseFn& density) const {
  const QuadRule& rule = triangle_rule(kControlQuadDegree);
  const std::size_t nc = size();
  Vector part(static_cast<Eigen::Index>(nc));
  parallel_for(nc, [&](std::size_t c) {
    const auto ci = static_cast<Eigen::Index>(c);
    std::vector<Point> pts;
    std::vector<double> wts;
    map_triangle_rule(rule, control_->element_vertices(c), pts, wts);
    double s = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) s += wts[q] * density(pts[q], u(ci));
    part(ci) = s;
  });
  return part.sum();
}

// QuadSampledSpace

QuadSampledSpace::QuadSampledSpace(std::shared_ptr<const ReconstructionMatrix> r, double c_B)
    : ControlSpace(std::move(r), c_B), degree_(assembly_degree(r_->degree())) {
  const TriMesh& mesh = r_->mesh();
  const QuadRule& rule = triangle_rule(degree_);
  per_element_ = rule.size();
  points_.resize(mesh.num_elements() * per_element_);
  weights_.resize(static_cast<Eigen::Index>(points_.size()));
  std::vector<Point> pts;
  std::vector<double> wts;
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    map_triangle_rule(rule, mesh.element_vertices(k), pts, wts);
    for (std::size_t q = 0; q < per_element_; ++q) {
      points_[k * per_element_ + q] = pts[q];
      weights_(static_cast<Eigen::Index>(k * per_element_ + q)) = wts[q];
    }
  }
}

Vector QuadSampledSpace::apply_B(const Vector& u) const {
  if (u.size() != static_cast<Eigen::Index>(size()))
    throw InvalidArgument("apply_B: control vector has wrong size");
  const VolumeSource src = [this, &u](std::size_t k, std::span<const Point> pts,
                                      std::span<double> out) {
    if (pts.size() != per_element_)
      throw InvalidArgument("apply_B: quadrature layout differs from the assembly rule");
    for (std::size_t q = 0; q < pts.size(); ++q)
      out[q] = c_B_ * u(static_cast<Eigen::Index>(k * per_element_ + q));
  };
  return assemble_load(*r_, EllipticCoeffs{}, src, nullptr);
}

Vector QuadSampledSpace::apply_B_star(const DGField& p) const {
  Vector out(static_cast<Eigen::Index>(size()));
  parallel_for(size(), [&](std::size_t i) {
    out(static_cast<Eigen::Index>(i)) = c_B_ * p.value(i / per_element_, points_[i]);
  });
  return out;
}

Vector QuadSampledSpace::j_prime(const Vector& u, const PointwiseFn& jp) const {
  Vector out(static_cast<Eigen::Index>(size()));
  parallel_for(size(), [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out(ii) = jp(points_[i], u(ii));
  });
  return out;
}

Vector QuadSampledSpace::project(const ScalarFn& f) const {
  Vector out(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) out(static_cast<Eigen::Index>(i)) = f(points_[i]);
  return out;
}

double QuadSampledSpace::l2_error(const Vector& u, const ScalarFn& f) const {
  return std::sqrt(integrate(u, [&f](const Point& x, double v) {
    const double d = f(x) - v;
    return d * d;
  }));
}

double QuadSampledSpace::integrate(const Vector& u, const PointwiseFn& density) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    s += weights_(ii) * density(points_[i], u(ii));
  }
  return s;
}

// projections

Vector project_admissible(const ControlSpace& space, const Vector& v, const AdmissibleSet& set) {
  set.validate();
  if (!v.allFinite()) throw InvalidArgument("project_admissible: non-finite control values");
  switch (set.kind) {
    case AdmissibleKind::Unconstrained:
      return v;
    case AdmissibleKind::LowerBound:
    case AdmissibleKind::Box:
      return v.unaryExpr([&set](double x) { return set.clamp(x); });
    case AdmissibleKind::IntegralLowerBound: {
      const double total = space.integral(v);
      if (total >= set.lower) return v;
      return (v.array() + (set.lower - total) / space.area()).matrix();
    }
  }
  return v;
}

ControlField project_admissible(const ControlField& v, const AdmissibleSet& set) {
  return {v.space, project_admissible(*v.space, v.values, set)};
}

ControlField l2_project_control(const std::shared_ptr<const ControlSpace>& space, const ScalarFn& f) {
  return {space, space->project(f)};
}

}  // namespace rdaocp
