#include "rdaocp/pgd.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rdaocp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

OcpDiscretization::OcpDiscretization(ProblemSpec spec, std::shared_ptr<const ReconstructionMatrix> r,
                                     std::shared_ptr<const ControlSpace> space,
                                     const SolveOptions& options)
    : spec_(std::move(spec)), r_(std::move(r)), space_(std::move(space)) {
  spec_.validate();
  if (!r_ || !space_) throw InvalidArgument("OcpDiscretization: null reconstruction or control space");
  if (&space_->reconstruction() != r_.get())
    throw InvalidArgument("OcpDiscretization: control space built on a different state space");
  if (space_->c_B() != spec_.c_B)
    throw InvalidArgument("OcpDiscretization: control space and problem disagree on B");
  solver_ = std::make_shared<const EllipticSolver>(r_, spec_.coeffs, options);
  state_load_ = solver_->load(as_source(spec_.coeffs.f), spec_.coeffs.phi);
}

StateAdjoint OcpDiscretization::solve_state_adjoint(const Vector& u) const {
  StateAdjoint sa;
  sa.y = solver_->solve_rhs(state_load_ + space_->apply_B(u));
  sa.p = solver_->solve(sa.y.compose(spec_.g_prime), nullptr);
  return sa;
}

Vector OcpDiscretization::reduced_gradient(const Vector& u, const DGField& p) const {
  return space_->j_prime(u, spec_.j_prime) + space_->apply_B_star(p);
}

double OcpDiscretization::objective(const DGField& y, const Vector& u) const {
  return rdaocp::objective(y, ControlField{space_, u}, spec_);
}

double objective(const DGField& y, const ControlField& u, const ProblemSpec& spec) {
  if (!spec.g_density || !spec.j_density) return kNaN;
  const TriMesh& mesh = y.mesh();
  const QuadRule& rule = triangle_rule(error_degree(y.degree()));
  Vector part(static_cast<Eigen::Index>(mesh.num_elements()));
  parallel_for(mesh.num_elements(), [&](std::size_t k) {
    std::vector<Point> pts;
    std::vector<double> wts;
    map_triangle_rule(rule, mesh.element_vertices(k), pts, wts);
    double s = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q)
      s += wts[q] * spec.g_density(pts[q], y.value(k, pts[q]));
    part(static_cast<Eigen::Index>(k)) = s;
  });
  return part.sum() + u.space->integrate(u.values, spec.j_density);
}

OcpSolution pgd_solve(const OcpDiscretization& disc, const PgdOptions& options) {
  if (!(options.rho > 0.0)) throw InvalidArgument("pgd_solve: step size rho must be positive");
  if (!(options.tol_u > 0.0)) throw InvalidArgument("pgd_solve: tol_u must be positive");
  if (options.max_iter < 1) throw InvalidArgument("pgd_solve: max_iter must be >= 1");
  const ControlSpace& space = disc.space();
  const AdmissibleSet& set = disc.spec().admissible;
  const auto n = static_cast<Eigen::Index>(space.size());
  if (options.reference && options.reference->size() != n)
    throw InvalidArgument("pgd_solve: reference control has wrong size");

  const Vector u0 = options.initial ? project_admissible(space, *options.initial, set)
                                    : project_admissible(space, Vector::Zero(n), set);
  double rho = options.rho;
  for (int restart = 0; restart <= options.max_halvings; ++restart, rho *= 0.5) {
    OcpSolution sol;
    sol.rho = rho;
    sol.restarts = restart;
    Vector u = u0;
    double prev_update = std::numeric_limits<double>::infinity();
    double prev_ref = options.reference ? space.norm(u - *options.reference) : kNaN;
    int growth = 0;
    bool diverged = false;
    for (int it = 1; it <= options.max_iter; ++it) {
      const StateAdjoint sa = disc.solve_state_adjoint(u);
      const Vector g = disc.reduced_gradient(u, sa.p);
      Vector next = u - rho * g;
      if (!next.allFinite()) {
        diverged = true;
        break;
      }
      next = project_admissible(space, next, set);
      IterationRecord rec;
      rec.iteration = it;
      rec.update_norm = space.norm(next - u);
      rec.objective = options.record_objective ? disc.objective(sa.y, u) : kNaN;
      rec.reference_distance = kNaN;
      rec.contraction = kNaN;
      if (options.reference) {
        rec.reference_distance = space.norm(next - *options.reference);
        rec.contraction = prev_ref > 0.0 ? rec.reference_distance / prev_ref : kNaN;
        prev_ref = rec.reference_distance;
      }
      sol.trace.push_back(rec);
      sol.iterations = it;
      if (!std::isfinite(rec.update_norm)) {
        diverged = true;
        break;
      }
      growth = rec.update_norm > prev_update ? growth + 1 : 0;
      prev_update = rec.update_norm;
      u = std::move(next);
      if (growth >= options.divergence_window) {
        diverged = true;
        break;
      }
      if (rec.update_norm <= options.tol_u) {
        sol.converged = true;
        break;
      }
    }
    if (diverged) continue;
    StateAdjoint sa = disc.solve_state_adjoint(u);
    sol.u = ControlField{disc.space_ptr(), std::move(u)};
    sol.y = std::move(sa.y);
    sol.p = std::move(sa.p);
    return sol;
  }
  std::ostringstream msg;
  msg << "pgd_solve: iteration diverged for every step size down to rho = " << rho * 2.0
      << "; the step must satisfy 0 <= 1 - 2 alpha rho + C rho^2 < 1, try a smaller rho";
  throw ConvergenceError(msg.str());
}

OcpSolution variational_pgd_solve(const ProblemSpec& spec,
                                  std::shared_ptr<const ReconstructionMatrix> r,
                                  const PgdOptions& options) {
  auto space = std::make_shared<const QuadSampledSpace>(r, spec.c_B);
  const OcpDiscretization disc(spec, std::move(r), std::move(space));
  return pgd_solve(disc, options);
}

double kkt_violation(const OcpDiscretization& disc, const Vector& u, const DGField& p,
                     double bound_tol) {
  const ControlSpace& space = disc.space();
  const AdmissibleSet& set = disc.spec().admissible;
  const Vector g = disc.reduced_gradient(u, p);
  double worst = 0.0;
  if (set.kind == AdmissibleKind::IntegralLowerBound) {
    const double lambda = space.integral(g) / space.area();
    for (Eigen::Index i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(g(i) - lambda));
    const bool active = space.integral(u) <= set.lower + bound_tol;
    worst = std::max(worst, active ? std::max(0.0, -lambda) : std::abs(lambda));
    return worst;
  }
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    double v = std::abs(g(i));
    if (set.pointwise() && u(i) <= set.lower + bound_tol)
      v = std::max(0.0, -g(i));
    else if (set.kind == AdmissibleKind::Box && u(i) >= set.upper - bound_tol)
      v = std::max(0.0, g(i));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace rdaocp
