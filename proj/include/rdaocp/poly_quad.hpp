#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <vector>

#include "rdaocp/common.hpp"

namespace rdaocp {

/// Number of bivariate monomials of total degree <= m.
constexpr int poly_dim(int m) { return (m + 1) * (m + 2) / 2; }

/// Exponent pairs in graded lexicographic order: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
const std::vector<std::array<int, 2>>& monomial_exponents(int m);

/// Quadrature rule. Triangle rules live on the reference triangle
/// (0,0), (1,0), (0,1) with weights summing to 1/2; edge rules live on [0,1]
/// with weights summing to 1 (only the first coordinate is used).
struct QuadRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int degree = 0;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxQuadDegree = 20;

/// Rule exact for bivariate polynomials of total degree <= `degree` (0..20).
const QuadRule& triangle_rule(int degree);
/// Gauss-Legendre rule on [0,1] exact to `degree` (0..41).
const QuadRule& edge_rule(int degree);

/// Gauss-Legendre nodes and weights on [0,1] with `n` points.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Physical quadrature points on triangle `tri` with weights scaled to its area.
void map_triangle_rule(const QuadRule& rule, const std::array<Point, 3>& tri,
                       std::vector<Point>& points, std::vector<double>& weights);

/// Default volume/edge exactness used during assembly.
constexpr int assembly_degree(int m) { return std::max(2 * m + 2, 6); }
/// Default exactness for error norms.
constexpr int error_degree(int m) { return 2 * m + 4; }

/// Scaled, shifted monomials phi_a(x) = ((x - center) / scale)^a on one element.
struct LocalBasis {
  int degree = 0;
  Point center = Point::Zero();
  double scale = 1.0;

  [[nodiscard]] int dim() const { return poly_dim(degree); }

  /// Values of all basis functions at x.
  void values(const Point& x, std::span<double> out) const;
  /// Gradients (out_dx, out_dy) at x.
  void gradients(const Point& x, std::span<double> out_dx, std::span<double> out_dy) const;
  /// Second derivatives at x.
  void hessians(const Point& x, std::span<double> out_xx, std::span<double> out_xy,
                std::span<double> out_yy) const;
};

/// Tabulated basis data: rows are points, columns are basis functions.
struct BasisTable {
  Eigen::MatrixXd values;
  Eigen::MatrixXd dx, dy;
  Eigen::MatrixXd dxx, dxy, dyy;
};

/// order 0: values; 1: + gradients; 2: + Hessians.
BasisTable eval_basis(const LocalBasis& basis, std::span<const Point> points, int order);

}  // namespace rdaocp
