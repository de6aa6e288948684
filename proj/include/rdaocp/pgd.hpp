#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "rdaocp/control.hpp"

namespace rdaocp {

struct PgdOptions {
  double rho = 1.0;
  double tol_u = 1e-10;
  int max_iter = 500;
  int max_halvings = 6;
  int divergence_window = 10;   // consecutive growing updates that count as divergence
  bool record_objective = true;
  std::optional<Vector> reference;  // control values for contraction ratios
  std::optional<Vector> initial;    // defaults to Pr(0)
};

struct IterationRecord {
  int iteration = 0;
  double update_norm = 0.0;      // ||u_{n+1} - u_n||
  double objective = 0.0;        // g(y_n) + j(u_n), NaN when not recorded
  double reference_distance = 0.0;  // ||u_{n+1} - u_ref||, NaN without reference
  double contraction = 0.0;      // ratio of successive reference distances
};

struct OcpSolution {
  ControlField u;
  DGField y;
  DGField p;
  std::vector<IterationRecord> trace;
  bool converged = false;
  int iterations = 0;
  double rho = 0.0;   // step size that produced the result
  int restarts = 0;   // step-size halvings
};

/// State and adjoint solves for a given control: y = F_h(f + B u, phi), p = F_h(g'(y), 0).
struct StateAdjoint {
  DGField y;
  DGField p;
};

class OcpDiscretization {
 public:
  OcpDiscretization(ProblemSpec spec, std::shared_ptr<const ReconstructionMatrix> r,
                    std::shared_ptr<const ControlSpace> space, const SolveOptions& options = {});

  [[nodiscard]] const ProblemSpec& spec() const { return spec_; }
  [[nodiscard]] const EllipticSolver& solver() const { return *solver_; }
  [[nodiscard]] const ControlSpace& space() const { return *space_; }
  [[nodiscard]] const std::shared_ptr<const ControlSpace>& space_ptr() const { return space_; }
  [[nodiscard]] const ReconstructionMatrix& reconstruction() const { return *r_; }
  [[nodiscard]] const std::shared_ptr<const ReconstructionMatrix>& reconstruction_ptr() const {
    return r_;
  }

  [[nodiscard]] StateAdjoint solve_state_adjoint(const Vector& u) const;
  /// j'(u) + B* p in the control representation.
  [[nodiscard]] Vector reduced_gradient(const Vector& u, const DGField& p) const;
  /// g(y) + j(u); NaN when the densities are not supplied.
  [[nodiscard]] double objective(const DGField& y, const Vector& u) const;

 private:
  ProblemSpec spec_;
  std::shared_ptr<const ReconstructionMatrix> r_;
  std::shared_ptr<const ControlSpace> space_;
  std::shared_ptr<const EllipticSolver> solver_;
  Vector state_load_;  // l_h[f, phi]
};

/// Projected gradient descent u_{n+1} = Pr(u_n - rho (j'(u_n) + B* p_n)).
OcpSolution pgd_solve(const OcpDiscretization& disc, const PgdOptions& options = {});

/// Variational discretisation: the control lives at the assembly quadrature points.
OcpSolution variational_pgd_solve(const ProblemSpec& spec,
                                  std::shared_ptr<const ReconstructionMatrix> r,
                                  const PgdOptions& options = {});

/// g(y) + j(u) by quadrature.
double objective(const DGField& y, const ControlField& u, const ProblemSpec& spec);

/// Largest violation of the discrete variational inequality over control entries:
/// |G| where the bound is inactive, max(0, -G) at the lower and max(0, G) at the upper bound,
/// with G = j'(u) + B* p. For the integral constraint, the deviation of G from a constant
/// (and the sign of the constant when the constraint is active).
double kkt_violation(const OcpDiscretization& disc, const Vector& u, const DGField& p,
                     double bound_tol = 1e-10);

}  // namespace rdaocp
