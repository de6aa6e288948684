#include "rdaocp/examples.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

namespace rdaocp {

namespace {

constexpr double kPi = std::numbers::pi;

double bump(const Point& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); }

Point bump_gradient(const Point& x) {
  return {kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
          kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y())};
}

// Shared pieces: y* = 2 pi^2 p*, p* = bump, y_d = 0, quadratic tracking.
ProblemSpec tracking_base(std::string name, ScalarFn u_exact, double c_B) {
  ProblemSpec spec;
  spec.name = std::move(name);
  spec.c_B = c_B;
  spec.coeffs.f = [u_exact, c_B](const Point& x) {
    return 4.0 * kPi * kPi * kPi * kPi * bump(x) - c_B * u_exact(x);
  };
  spec.g_prime = [](const Point&, double y) { return y; };
  spec.g_density = [](const Point&, double y) { return 0.5 * y * y; };
  spec.beta = 1.0;
  ExactSolution ex;
  ex.y = [](const Point& x) { return 2.0 * kPi * kPi * bump(x); };
  ex.grad_y = [](const Point& x) -> Point { return 2.0 * kPi * kPi * bump_gradient(x); };
  ex.p = bump;
  ex.grad_p = bump_gradient;
  ex.u = std::move(u_exact);
  spec.exact = std::move(ex);
  return spec;
}

}  // namespace

ExampleId parse_example(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "ex1" || s == "1") return ExampleId::Ex1_LowerBound;
  if (s == "ex2" || s == "2") return ExampleId::Ex2_BoxL3;
  if (s == "ex3" || s == "3") return ExampleId::Ex3_IntegralSmooth;
  throw InvalidArgument("unknown example '" + name + "' (expected ex1, ex2 or ex3)");
}

std::string to_string(ExampleId id) {
  switch (id) {
    case ExampleId::Ex1_LowerBound:
      return "ex1";
    case ExampleId::Ex2_BoxL3:
      return "ex2";
    case ExampleId::Ex3_IntegralSmooth:
      return "ex3";
  }
  return "unknown";
}

double implicit_s(double p) {
  const double a = std::abs(p);
  // 4 s^2 + s - a/2 = 0, stable form of (-1 + sqrt(1 + 8a)) / 8
  const double s = a / (1.0 + std::sqrt(1.0 + 8.0 * a));
  return p < 0.0 ? -s : s;
}

double default_rho(ExampleId id) {
  switch (id) {
    case ExampleId::Ex1_LowerBound:
    case ExampleId::Ex3_IntegralSmooth:
      return 1.0;
    case ExampleId::Ex2_BoxL3:
      return 0.125;
  }
  return 1.0;
}

ProblemSpec make_example(ExampleId id) {
  switch (id) {
    case ExampleId::Ex1_LowerBound: {
      const auto u_d = [](const Point& x) {
        return 1.0 - std::sin(kPi * x.x() / 2.0) - std::sin(kPi * x.y() / 2.0);
      };
      ProblemSpec spec = tracking_base(
          "ex1", [u_d](const Point& x) { return std::max(u_d(x) - bump(x), 0.0); }, 1.0);
      spec.j_prime = [u_d](const Point& x, double u) { return u - u_d(x); };
      spec.j_density = [u_d](const Point& x, double u) {
        const double d = u - u_d(x);
        return 0.5 * d * d;
      };
      spec.admissible = AdmissibleSet::lower_bound(0.0);
      return spec;
    }
    case ExampleId::Ex2_BoxL3: {
      const auto u_d = [](const Point& x) { return 1.5 - x.x() - x.y(); };
      ProblemSpec spec = tracking_base(
          "ex2",
          [u_d](const Point& x) {
            return std::clamp(u_d(x) - implicit_s(bump(x)), 0.0, 1.0);
          },
          0.5);
      spec.j_prime = [u_d](const Point& x, double u) {
        const double d = u - u_d(x);
        return d + 4.0 * d * std::abs(d);
      };
      spec.j_density = [u_d](const Point& x, double u) {
        const double d = std::abs(u - u_d(x));
        return 0.5 * d * d + 4.0 / 3.0 * d * d * d;
      };
      spec.admissible = AdmissibleSet::box(0.0, 1.0);
      return spec;
    }
    case ExampleId::Ex3_IntegralSmooth: {
      const auto u_d = [](const Point& x) { return 1.0 - 2.0 * x.x() - 2.0 * x.y(); };
      // mean(u_d - p*) = -1 - 4 / pi^2 < 0, so the constraint is active
      const double shift = 1.0 + 4.0 / (kPi * kPi);
      ProblemSpec spec = tracking_base(
          "ex3", [u_d, shift](const Point& x) { return u_d(x) - bump(x) + shift; }, 1.0);
      spec.j_prime = [u_d](const Point& x, double u) { return u - u_d(x); };
      spec.j_density = [u_d](const Point& x, double u) {
        const double d = u - u_d(x);
        return 0.5 * d * d;
      };
      spec.admissible = AdmissibleSet::integral_lower_bound(0.0);
      return spec;
    }
  }
  throw InvalidArgument("make_example: unknown example id");
}

PoissonProblem make_poisson() {
  // y = exp(x + y): nonzero boundary data on every side
  PoissonProblem pb;
  const auto y = [](const Point& x) { return std::exp(x.x() + x.y()); };
  pb.exact.value = y;
  pb.exact.gradient = [y](const Point& x) -> Point {
    const double e = y(x);
    return {e, e};
  };
  pb.coeffs.f = [y](const Point& x) { return -2.0 * y(x); };
  pb.coeffs.phi = y;
  return pb;
}

}  // namespace rdaocp
