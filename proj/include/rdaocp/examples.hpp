#pragma once

#include <string>

#include "rdaocp/control.hpp"

namespace rdaocp {

enum class ExampleId { Ex1_LowerBound, Ex2_BoxL3, Ex3_IntegralSmooth };

/// Parses "ex1", "ex2", "ex3" (case-insensitive).
ExampleId parse_example(const std::string& name);
std::string to_string(ExampleId id);

/// Manufactured optimal control problem with exact solution callbacks.
ProblemSpec make_example(ExampleId id);

/// Step size that keeps the projected gradient iteration contractive.
double default_rho(ExampleId id);

/// Root of s + 4 s^2 sgn(s) = p / 2 (closed form, odd in p).
double implicit_s(double p);

/// Manufactured Poisson problem y = exp(x + y) with inhomogeneous Dirichlet data.
struct PoissonProblem {
  EllipticCoeffs coeffs;
  ExactFunction exact;
};
PoissonProblem make_poisson();

}  // namespace rdaocp
