#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rdaocp/output.hpp"
#include "rdaocp/study.hpp"

using namespace rdaocp;

namespace {

constexpr double kPi = std::numbers::pi;

double laplacian_fd(const ScalarFn& f, const Point& x, double h) {
  return (f(x + Point(h, 0)) + f(x - Point(h, 0)) + f(x + Point(0, h)) + f(x - Point(0, h)) -
          4.0 * f(x)) /
         (h * h);
}

double bisect_s(double p) {
  const auto g = [p](double s) { return s + 4.0 * s * s * (s < 0 ? -1.0 : 1.0) - 0.5 * p; };
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string study_csv(const StudyConfig& cfg) {
  std::ostringstream os;
  write_study_csv(os, run_convergence_study(cfg), study_metadata(cfg));
  return os.str();
}

}  // namespace

TEST_CASE("manufactured data satisfies the optimality system") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> U(0.02, 0.98);
  for (ExampleId id : {ExampleId::Ex1_LowerBound, ExampleId::Ex2_BoxL3, ExampleId::Ex3_IntegralSmooth}) {
    const ProblemSpec spec = make_example(id);
    REQUIRE(spec.exact);
    const ExactSolution& ex = *spec.exact;
    double worst_state = 0.0, worst_adj = 0.0, worst_vi = 0.0, worst_fd = 0.0;
    std::vector<double> grads;
    for (int i = 0; i < 50; ++i) {
      const Point x(U(rng), U(rng));
      // -lap y* = 4 pi^4 p*, -lap p* = 2 pi^2 p*
      worst_state = std::max(worst_state, std::abs(4.0 * std::pow(kPi, 4) * ex.p(x) - spec.coeffs.f(x) -
                                                   spec.c_B * ex.u(x)));
      worst_adj = std::max(worst_adj, std::abs(2.0 * kPi * kPi * ex.p(x) - spec.g_prime(x, ex.y(x))));
      worst_fd = std::max(worst_fd, std::abs(-laplacian_fd(ex.y, x, 1e-4) - 4.0 * std::pow(kPi, 4) * ex.p(x)));
      worst_fd = std::max(worst_fd, std::abs(-laplacian_fd(ex.p, x, 1e-4) - 2.0 * kPi * kPi * ex.p(x)) * 10.0);
      const double g = spec.j_prime(x, ex.u(x)) + spec.c_B * ex.p(x);
      const double u = ex.u(x);
      grads.push_back(g);
      if (spec.admissible.pointwise()) {
        const AdmissibleSet& s = spec.admissible;
        if (u > s.lower + 1e-12 && (s.kind != AdmissibleKind::Box || u < s.upper - 1e-12))
          worst_vi = std::max(worst_vi, std::abs(g));
        else if (u <= s.lower + 1e-12)
          worst_vi = std::max(worst_vi, std::max(0.0, -g));
        else
          worst_vi = std::max(worst_vi, std::max(0.0, g));
      }
      const Point gy = ex.grad_y(x), gp = ex.grad_p(x);
      const double h = 1e-6;
      worst_fd = std::max(worst_fd, std::abs((ex.p(x + Point(h, 0)) - ex.p(x - Point(h, 0))) / (2 * h) - gp.x()) * 1e3);
      worst_fd = std::max(worst_fd, std::abs((ex.y(x + Point(0, h)) - ex.y(x - Point(0, h))) / (2 * h) - gy.y()) * 1e2);
    }
    CHECK(worst_state < 1e-10);
    CHECK(worst_adj < 1e-10);
    CHECK(worst_vi < 1e-10);
    CHECK(worst_fd < 1e-2);
    if (id == ExampleId::Ex3_IntegralSmooth) {
      // gradient is a nonnegative constant and the integral constraint is active
      for (double g : grads) CHECK(std::abs(g - grads.front()) < 1e-12);
      CHECK(grads.front() >= 0.0);
      const ControlMesh cm(16);
      CHECK(std::abs(element_means(cm, ex.u, 12).sum() * cm.element_area()) < 1e-12);
    }
  }
}

TEST_CASE("implicit function of example 2") {
  CHECK(implicit_s(0.0) == 0.0);
  const double s = implicit_s(0.5);
  CHECK(std::abs(s - (-1.0 + std::sqrt(5.0)) / 8.0) < 1e-15);
  CHECK(std::abs(s + 4.0 * s * s - 0.25) < 1e-14);
  for (double p : {-3.0, -0.7, -1e-9, 1e-9, 0.2, 1.0, 19.7}) {
    const double v = implicit_s(p);
    CHECK(std::abs(v - bisect_s(p)) < 1e-13);
    CHECK(std::abs(implicit_s(-p) + v) == 0.0);
  }
}

TEST_CASE("configuration parsing") {
  CHECK(parse_example("EX2") == ExampleId::Ex2_BoxL3);
  CHECK(parse_example("3") == ExampleId::Ex3_IntegralSmooth);
  CHECK_THROWS_AS(parse_example("ex4"), InvalidArgument);
  CHECK(parse_hu_rule("quad") == HuRule::Quad);
  CHECK_THROWS_AS(parse_hu_rule("quartic"), InvalidArgument);
  CHECK(to_string(HuRule::Variational) == "variational");

  CHECK(control_resolution(HuRule::Equal, 8) == 8);
  CHECK(control_resolution(HuRule::Quad, 8) == 16);
  CHECK(control_resolution(HuRule::Quad, 2) == 1);
  CHECK(control_resolution(HuRule::Cubic, 8) == 32);
  CHECK(control_resolution(HuRule::Cubic, 4) == 4);
  CHECK_THROWS_AS(control_resolution(HuRule::Quad, 6), InvalidArgument);
  CHECK_THROWS_AS(control_resolution(HuRule::Cubic, 2), InvalidArgument);

  StudyConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.effective_rho() == 1.0);
  cfg.example = ExampleId::Ex2_BoxL3;
  CHECK(cfg.effective_rho() == 0.125);
  cfg.mu = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.mu = 0.0;
  cfg.n_list = {};
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("orders and clipping") {
  std::vector<StudyRow> rows(3);
  rows[0].h = 0.25;
  rows[1].h = 0.125;
  rows[2].h = 0.0625;
  rows[0].err_u = 1.0;
  rows[1].err_u = 0.25;
  rows[2].err_u = 0.125;
  rows[0].err_y = rows[1].err_y = rows[2].err_y = 1.0;
  compute_eoc(rows);
  CHECK(std::isnan(rows[0].eoc_u));
  CHECK(std::abs(rows[1].eoc_u - 2.0) < 1e-14);
  CHECK(std::abs(rows[2].eoc_u - 1.0) < 1e-14);
  CHECK(std::abs(rows[2].eoc_y) < 1e-14);

  Vector v(3);
  v << 0.5, 2.5, 9.0;
  const Vector c = clip(v, 2.0);
  CHECK(c(0) == 0.5);
  CHECK(c(1) == 2.0);
  CHECK(c(2) == 2.0);
}

TEST_CASE("studies are deterministic") {
  StudyConfig cfg;
  cfg.n_list = {4, 8};
  const std::string a = study_csv(cfg);
  const std::string b = study_csv(cfg);
  CHECK(a == b);
  CHECK(a.find("n,n_u,h,h_u,err_u,err_y,err_p,dg_y,dg_p,err_rec,eoc_u") != std::string::npos);
  std::istringstream is(a);
  std::string line;
  int data = 0;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#' && line[0] != 'n') ++data;
  CHECK(data == 2);
  CHECK(format_number(0.000123456789) == "1.23457e-04");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("estimator study rows") {
  StudyConfig cfg;
  cfg.n_list = {4};
  const auto rows = run_estimator_study(cfg, [&](const RunResult&, const IndicatorReport&,
                                                 const EffectivityReport& eff) {
    CHECK(clip(eff.e_u, cfg.cap).maxCoeff() <= cfg.cap);
  });
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].max_e_y >= rows[0].min_e_y);
  CHECK(rows[0].min_e_y > 0.0);
  cfg.hu = HuRule::Variational;
  CHECK_THROWS_AS(run_estimator_study(cfg), InvalidArgument);
}
