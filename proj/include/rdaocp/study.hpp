#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rdaocp/estimators.hpp"
#include "rdaocp/examples.hpp"

namespace rdaocp {

/// Coupling of the control mesh to the state mesh (h = 1/n is the grid spacing).
enum class HuRule {
  Equal,        // h_u = h
  Quad,         // h_u = 4 h^2
  Cubic,        // h_u = 16 h^3
  Variational,  // no control mesh, control at the quadrature points
};

HuRule parse_hu_rule(const std::string& name);
std::string to_string(HuRule rule);

/// Control resolution n_u for state resolution n; throws when not an integer nested with n.
std::size_t control_resolution(HuRule rule, std::size_t n);

struct StudyConfig {
  ExampleId example = ExampleId::Ex1_LowerBound;
  int m = 1;
  std::vector<std::size_t> n_list{8, 16, 32};
  HuRule hu = HuRule::Equal;
  double mu = 0.0;   // <= 0 selects 3 m^2
  double rho = 0.0;  // <= 0 selects default_rho(example)
  double tol_u = 1e-10;
  int max_iter = 500;
  double cap = 2.0;  // clip for e_Ku in outputs
  JPrimeEval j_prime_eval = JPrimeEval::Barycenter;

  void validate() const;
  [[nodiscard]] double effective_rho() const { return rho > 0.0 ? rho : default_rho(example); }
};

struct StudyRow {
  std::size_t n = 0;
  std::size_t n_u = 0;  // 0 in variational mode
  double h = 0.0;
  double h_u = 0.0;  // NaN in variational mode
  double err_u = 0.0, err_y = 0.0, err_p = 0.0;
  double dg_y = 0.0, dg_p = 0.0;
  double err_rec = 0.0;  // ||u - R_h u_h||, NaN unless h_u = h
  double eoc_u = 0.0, eoc_y = 0.0, eoc_p = 0.0, eoc_dg_y = 0.0, eoc_dg_p = 0.0, eoc_rec = 0.0;
  int iterations = 0;
  double rho = 0.0;
  double wall_time = 0.0;  // seconds; reported on the console, not in CSV
};

/// One discretised problem instance.
struct Instance {
  ProblemSpec spec;
  std::shared_ptr<const TriMesh> mesh;
  std::shared_ptr<const ReconstructionMatrix> r;
  std::shared_ptr<const ControlMesh> control;  // null in variational mode
  std::shared_ptr<const ControlSpace> space;
  std::shared_ptr<const OcpDiscretization> disc;
};

Instance build_instance(const StudyConfig& cfg, std::size_t n);

struct RunResult {
  Instance instance;
  OcpSolution solution;
  StudyRow row;  // errors only, EOC columns left NaN
};

/// Solves one instance and measures its errors. Throws ConvergenceError naming n when PGD fails.
RunResult run_instance(const StudyConfig& cfg, std::size_t n);

/// Fills the EOC columns from consecutive rows.
void compute_eoc(std::vector<StudyRow>& rows);

using RunCallback = std::function<void(const RunResult&)>;

std::vector<StudyRow> run_convergence_study(const StudyConfig& cfg,
                                            const RunCallback& on_run = nullptr);

struct EstimatorRow {
  std::size_t n = 0;
  double h = 0.0;
  double max_e_y = 0.0, min_e_y = 0.0;
  double max_e_p = 0.0, min_e_p = 0.0;
  double max_e_u = 0.0, min_e_u = 0.0;  // uncapped
  double eta0 = 0.0, eta1_y = 0.0, eta2_y = 0.0, eta3_y = 0.0;
  double eta1_p = 0.0, eta2_p = 0.0, eta3_p = 0.0;
  double total = 0.0;
  int iterations = 0;
};

using EstimatorCallback = std::function<void(const RunResult&, const IndicatorReport&,
                                             const EffectivityReport&)>;

/// Effectivity ratios per mesh. Needs a piecewise-constant control (not variational).
std::vector<EstimatorRow> run_estimator_study(const StudyConfig& cfg,
                                              const EstimatorCallback& on_run = nullptr);

/// min(v, cap) entrywise.
Vector clip(const Vector& v, double cap);

}  // namespace rdaocp
