#include "rdaocp/study.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace rdaocp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double eoc(double e0, double e1, double h0, double h1) {
  if (!(e0 > 0.0) || !(e1 > 0.0) || !std::isfinite(e0) || !std::isfinite(e1)) return kNaN;
  return std::log(e0 / e1) / std::log(h0 / h1);
}

}  // namespace

HuRule parse_hu_rule(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "equal") return HuRule::Equal;
  if (s == "quad") return HuRule::Quad;
  if (s == "cubic") return HuRule::Cubic;
  if (s == "variational") return HuRule::Variational;
  throw InvalidArgument("unknown h_u rule '" + name + "' (expected equal, quad, cubic or variational)");
}

std::string to_string(HuRule rule) {
  switch (rule) {
    case HuRule::Equal:
      return "equal";
    case HuRule::Quad:
      return "quad";
    case HuRule::Cubic:
      return "cubic";
    case HuRule::Variational:
      return "variational";
  }
  return "unknown";
}

std::size_t control_resolution(HuRule rule, std::size_t n) {
  if (n == 0) throw InvalidArgument("control_resolution: n must be positive");
  std::size_t num = 0, den = 1;
  switch (rule) {
    case HuRule::Equal:
      return n;
    case HuRule::Quad:
      num = n * n;
      den = 4;
      break;
    case HuRule::Cubic:
      num = n * n * n;
      den = 16;
      break;
    case HuRule::Variational:
      return 0;
  }
  if (num % den != 0 || num / den == 0 || ((num / den) % n != 0 && n % (num / den) != 0)) {
    std::ostringstream msg;
    msg << "h_u rule '" << to_string(rule) << "' gives no nested integer control mesh for n = " << n
        << " (use n divisible by 4)";
    throw InvalidArgument(msg.str());
  }
  return num / den;
}

void StudyConfig::validate() const {
  if (m < 1 || m > 6) throw InvalidArgument("study: degree m must be in 1..6");
  if (n_list.empty()) throw InvalidArgument("study: mesh list is empty");
  for (const std::size_t n : n_list) {
    if (n < 2) throw InvalidArgument("study: every n must be at least 2");
    control_resolution(hu, n);
  }
  if (mu < 0.0 || !std::isfinite(mu)) throw InvalidArgument("study: mu must be positive");
  if (rho < 0.0 || !std::isfinite(rho)) throw InvalidArgument("study: rho must be positive");
  if (!(tol_u > 0.0)) throw InvalidArgument("study: tol_u must be positive");
  if (max_iter < 1) throw InvalidArgument("study: max_iter must be >= 1");
  if (!(cap > 0.0)) throw InvalidArgument("study: cap must be positive");
}

Instance build_instance(const StudyConfig& cfg, std::size_t n) {
  Instance inst;
  inst.spec = make_example(cfg.example);
  inst.spec.coeffs.mu = cfg.mu;
  inst.mesh = std::make_shared<const TriMesh>(TriMesh::build_uniform(n, inst.spec.domain));
  ReconstructionOptions ro;
  ro.degree = cfg.m;
  inst.r = assemble_reconstruction(inst.mesh, ro);
  if (cfg.hu == HuRule::Variational) {
    inst.space = std::make_shared<const QuadSampledSpace>(inst.r, inst.spec.c_B);
  } else {
    inst.control =
        std::make_shared<const ControlMesh>(control_resolution(cfg.hu, n), inst.spec.domain);
    inst.space = std::make_shared<const PiecewiseConstantSpace>(inst.r, inst.control,
                                                                inst.spec.c_B, cfg.j_prime_eval);
  }
  inst.disc = std::make_shared<const OcpDiscretization>(inst.spec, inst.r, inst.space);
  return inst;
}

RunResult run_instance(const StudyConfig& cfg, std::size_t n) {
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  res.instance = build_instance(cfg, n);
  const Instance& inst = res.instance;
  PgdOptions po;
  po.rho = cfg.effective_rho();
  po.tol_u = cfg.tol_u;
  po.max_iter = cfg.max_iter;
  po.record_objective = false;
  try {
    res.solution = pgd_solve(*inst.disc, po);
  } catch (const ConvergenceError& e) {
    std::ostringstream msg;
    msg << e.what() << " (n = " << n << ", h = 1/" << n << ")";
    throw ConvergenceError(msg.str());
  }
  if (!res.solution.converged) {
    std::ostringstream msg;
    msg << "projected gradient did not reach tol_u = " << cfg.tol_u << " within " << cfg.max_iter
        << " iterations (n = " << n << ", h = 1/" << n << ")";
    throw ConvergenceError(msg.str());
  }

  const ExactSolution& ex = *inst.spec.exact;
  const OcpSolution& sol = res.solution;
  const double mu = inst.spec.coeffs.penalty(cfg.m);
  StudyRow& row = res.row;
  row.n = n;
  row.h = 1.0 / static_cast<double>(n);
  row.n_u = inst.control ? inst.control->n() : 0;
  row.h_u = inst.control ? 1.0 / static_cast<double>(row.n_u) : kNaN;
  row.err_u = inst.space->l2_error(sol.u.values, ex.u);
  row.err_y = l2_error(sol.y, ex.y);
  row.err_p = l2_error(sol.p, ex.p);
  row.dg_y = dg_norm(sol.y, {ex.y, ex.grad_y}, mu);
  row.dg_p = dg_norm(sol.p, {ex.p, ex.grad_p}, mu);
  row.err_rec = kNaN;
  if (cfg.hu == HuRule::Equal)
    row.err_rec = zz_recover(inst.control, sol.u.values).l2_error(ex.u);
  row.eoc_u = row.eoc_y = row.eoc_p = row.eoc_dg_y = row.eoc_dg_p = row.eoc_rec = kNaN;
  row.iterations = sol.iterations;
  row.rho = sol.rho;
  row.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

void compute_eoc(std::vector<StudyRow>& rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    StudyRow& r = rows[k];
    if (k == 0) {
      r.eoc_u = r.eoc_y = r.eoc_p = r.eoc_dg_y = r.eoc_dg_p = r.eoc_rec = kNaN;
      continue;
    }
    const StudyRow& q = rows[k - 1];
    r.eoc_u = eoc(q.err_u, r.err_u, q.h, r.h);
    r.eoc_y = eoc(q.err_y, r.err_y, q.h, r.h);
    r.eoc_p = eoc(q.err_p, r.err_p, q.h, r.h);
    r.eoc_dg_y = eoc(q.dg_y, r.dg_y, q.h, r.h);
    r.eoc_dg_p = eoc(q.dg_p, r.dg_p, q.h, r.h);
    r.eoc_rec = eoc(q.err_rec, r.err_rec, q.h, r.h);
  }
}

std::vector<StudyRow> run_convergence_study(const StudyConfig& cfg, const RunCallback& on_run) {
  cfg.validate();
  std::vector<StudyRow> rows;
  for (const std::size_t n : cfg.n_list) {
    RunResult res = run_instance(cfg, n);
    if (on_run) on_run(res);
    rows.push_back(res.row);
  }
  compute_eoc(rows);
  return rows;
}

std::vector<EstimatorRow> run_estimator_study(const StudyConfig& cfg,
                                              const EstimatorCallback& on_run) {
  cfg.validate();
  if (cfg.hu == HuRule::Variational)
    throw InvalidArgument("estimator study: needs a control mesh (h_u rule other than variational)");
  const ControlEstimate mode = make_example(cfg.example).admissible.pointwise()
                                   ? ControlEstimate::Sharp
                                   : ControlEstimate::General;
  std::vector<EstimatorRow> rows;
  for (const std::size_t n : cfg.n_list) {
    const RunResult res = run_instance(cfg, n);
    const IndicatorReport rep = compute_indicators(*res.instance.disc, res.solution, mode);
    const EffectivityReport eff = effectivity(*res.instance.disc, res.solution, rep);
    EstimatorRow row;
    row.n = n;
    row.h = res.row.h;
    row.max_e_y = EffectivityReport::max_of(eff.e_y);
    row.min_e_y = EffectivityReport::min_positive(eff.e_y);
    row.max_e_p = EffectivityReport::max_of(eff.e_p);
    row.min_e_p = EffectivityReport::min_positive(eff.e_p);
    row.max_e_u = EffectivityReport::max_of(eff.e_u);
    row.min_e_u = EffectivityReport::min_positive(eff.e_u);
    row.eta0 = mode == ControlEstimate::Sharp ? rep.control.eta0_sharp : rep.control.eta0;
    row.eta1_y = rep.eta1_y_total();
    row.eta2_y = rep.eta2_y_total();
    row.eta3_y = rep.eta3_y_total();
    row.eta1_p = rep.eta1_p_total();
    row.eta2_p = rep.eta2_p_total();
    row.eta3_p = rep.eta3_p_total();
    row.total = rep.total(mode);
    row.iterations = res.solution.iterations;
    if (on_run) on_run(res, rep, eff);
    rows.push_back(row);
  }
  return rows;
}

Vector clip(const Vector& v, double cap) { return v.cwiseMin(cap); }

}  // namespace rdaocp
