#include "rdaocp/poly_quad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rdaocp {

const std::vector<std::array<int, 2>>& monomial_exponents(int m) {
  static const std::array<std::vector<std::array<int, 2>>, 12> tables = [] {
    std::array<std::vector<std::array<int, 2>>, 12> t;
    for (int deg = 0; deg < 12; ++deg)
      for (int k = 0; k <= deg; ++k)
        for (int i = k; i >= 0; --i) t[deg].push_back({i, k - i});
    return t;
  }();
  if (m < 0 || m >= 12) throw InvalidArgument("monomial_exponents: degree out of range");
  return tables[m];
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one point");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // P_n(x) and P_n'(x) through the three-term recurrence
  const auto legendre = [n](double x, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, dp);
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

struct Orbit {
  double weight;
  double a, b, c;  // barycentric coordinates; all permutations are used
};

QuadRule symmetric_rule(int degree, std::initializer_list<Orbit> orbits) {
  QuadRule rule;
  rule.degree = degree;
  for (const Orbit& o : orbits) {
    std::vector<std::array<double, 3>> perms;
    const std::array<double, 3> base{o.a, o.b, o.c};
    std::array<int, 3> idx{0, 1, 2};
    do {
      const std::array<double, 3> p{base[idx[0]], base[idx[1]], base[idx[2]]};
      bool seen = false;
      for (const auto& q : perms)
        if (q == p) seen = true;
      if (!seen) perms.push_back(p);
    } while (std::next_permutation(idx.begin(), idx.end()));
    for (const auto& p : perms) {
      rule.points.emplace_back(p[1], p[2]);
      rule.weights.push_back(0.5 * o.weight);
    }
  }
  return rule;
}

QuadRule collapsed_rule(int degree) {
  const int nu = (degree + 3) / 2;  // Jacobian adds one degree in the collapsed direction
  const int nv = (degree + 2) / 2;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre(nu, xu, wu);
  gauss_legendre(nv, xv, wv);
  QuadRule rule;
  rule.degree = degree;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double u = xu[i];
      rule.points.emplace_back(u, xv[j] * (1.0 - u));
      rule.weights.push_back(wu[i] * wv[j] * (1.0 - u));
    }
  return rule;
}

QuadRule make_triangle_rule(int degree) {
  switch (degree) {
    case 0:
    case 1:
      return symmetric_rule(1, {{1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}});
    case 2:
      return symmetric_rule(2, {{1.0 / 3.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}});
    case 3:
    case 4:
      return symmetric_rule(
          4, {{0.223381589678011, 0.108103018168070, 0.445948490915965, 0.445948490915965},
              {0.109951743655322, 0.816847572980459, 0.091576213509771, 0.091576213509771}});
    case 5: {
      const double s15 = std::sqrt(15.0);
      const double a1 = (6.0 - s15) / 21.0;
      const double a2 = (6.0 + s15) / 21.0;
      return symmetric_rule(5, {{9.0 / 40.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                                {(155.0 - s15) / 1200.0, 1.0 - 2.0 * a1, a1, a1},
                                {(155.0 + s15) / 1200.0, 1.0 - 2.0 * a2, a2, a2}});
    }
    case 6:
      return symmetric_rule(
          6, {{0.116786275726379, 0.501426509658179, 0.249286745170910, 0.249286745170910},
              {0.050844906370207, 0.873821971016996, 0.063089014491502, 0.063089014491502},
              {0.082851075618374, 0.053145049844817, 0.310352451033784, 0.636502499121399}});
    default:
      return collapsed_rule(degree);
  }
}

}  // namespace

const QuadRule& triangle_rule(int degree) {
  if (degree < 0 || degree > kMaxQuadDegree)
    throw InvalidArgument("triangle_rule: degree " + std::to_string(degree) +
                          " outside supported range 0.." + std::to_string(kMaxQuadDegree));
  static const std::vector<QuadRule> rules = [] {
    std::vector<QuadRule> r;
    for (int d = 0; d <= kMaxQuadDegree; ++d) r.push_back(make_triangle_rule(d));
    return r;
  }();
  return rules[degree];
}

const QuadRule& edge_rule(int degree) {
  constexpr int kMaxEdgeDegree = 41;
  if (degree < 0 || degree > kMaxEdgeDegree)
    throw InvalidArgument("edge_rule: degree " + std::to_string(degree) + " out of range");
  static const std::vector<QuadRule> rules = [] {
    std::vector<QuadRule> r;
    for (int d = 0; d <= kMaxEdgeDegree; ++d) {
      const int n = d / 2 + 1;
      std::vector<double> x, w;
      gauss_legendre(n, x, w);
      QuadRule rule;
      rule.degree = 2 * n - 1;
      for (int i = 0; i < n; ++i) {
        rule.points.emplace_back(x[i], 0.0);
        rule.weights.push_back(w[i]);
      }
      r.push_back(std::move(rule));
    }
    return r;
  }();
  return rules[degree];
}

void map_triangle_rule(const QuadRule& rule, const std::array<Point, 3>& tri,
                       std::vector<Point>& points, std::vector<double>& weights) {
  const Point e1 = tri[1] - tri[0];
  const Point e2 = tri[2] - tri[0];
  const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  points.resize(rule.size());
  weights.resize(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    points[q] = tri[0] + rule.points[q].x() * e1 + rule.points[q].y() * e2;
    weights[q] = rule.weights[q] * jac;
  }
}

namespace {

void powers(double t, int m, std::span<double> out) {
  out[0] = 1.0;
  for (int i = 1; i <= m; ++i) out[i] = out[i - 1] * t;
}

}  // namespace

void LocalBasis::values(const Point& x, std::span<double> out) const {
  std::array<double, 16> px{}, py{};
  powers((x.x() - center.x()) / scale, degree, px);
  powers((x.y() - center.y()) / scale, degree, py);
  const auto& exps = monomial_exponents(degree);
  for (std::size_t a = 0; a < exps.size(); ++a) out[a] = px[exps[a][0]] * py[exps[a][1]];
}

void LocalBasis::gradients(const Point& x, std::span<double> out_dx,
                           std::span<double> out_dy) const {
  std::array<double, 16> px{}, py{};
  powers((x.x() - center.x()) / scale, degree, px);
  powers((x.y() - center.y()) / scale, degree, py);
  const auto& exps = monomial_exponents(degree);
  const double inv = 1.0 / scale;
  for (std::size_t a = 0; a < exps.size(); ++a) {
    const int i = exps[a][0];
    const int j = exps[a][1];
    out_dx[a] = i > 0 ? i * px[i - 1] * py[j] * inv : 0.0;
    out_dy[a] = j > 0 ? j * px[i] * py[j - 1] * inv : 0.0;
  }
}

void LocalBasis::hessians(const Point& x, std::span<double> out_xx, std::span<double> out_xy,
                          std::span<double> out_yy) const {
  std::array<double, 16> px{}, py{};
  powers((x.x() - center.x()) / scale, degree, px);
  powers((x.y() - center.y()) / scale, degree, py);
  const auto& exps = monomial_exponents(degree);
  const double inv2 = 1.0 / (scale * scale);
  for (std::size_t a = 0; a < exps.size(); ++a) {
    const int i = exps[a][0];
    const int j = exps[a][1];
    out_xx[a] = i > 1 ? i * (i - 1) * px[i - 2] * py[j] * inv2 : 0.0;
    out_xy[a] = (i > 0 && j > 0) ? i * j * px[i - 1] * py[j - 1] * inv2 : 0.0;
    out_yy[a] = j > 1 ? j * (j - 1) * px[i] * py[j - 2] * inv2 : 0.0;
  }
}

BasisTable eval_basis(const LocalBasis& basis, std::span<const Point> points, int order) {
  if (order < 0 || order > 2) throw InvalidArgument("eval_basis: order must be 0, 1 or 2");
  const int dim = basis.dim();
  const auto np = static_cast<Eigen::Index>(points.size());
  BasisTable t;
  t.values.resize(np, dim);
  if (order >= 1) {
    t.dx.resize(np, dim);
    t.dy.resize(np, dim);
  }
  if (order >= 2) {
    t.dxx.resize(np, dim);
    t.dxy.resize(np, dim);
    t.dyy.resize(np, dim);
  }
  std::vector<double> a(dim), b(dim), c(dim);
  for (Eigen::Index q = 0; q < np; ++q) {
    basis.values(points[q], a);
    for (int i = 0; i < dim; ++i) t.values(q, i) = a[i];
    if (order >= 1) {
      basis.gradients(points[q], a, b);
      for (int i = 0; i < dim; ++i) {
        t.dx(q, i) = a[i];
        t.dy(q, i) = b[i];
      }
    }
    if (order >= 2) {
      basis.hessians(points[q], a, b, c);
      for (int i = 0; i < dim; ++i) {
        t.dxx(q, i) = a[i];
        t.dxy(q, i) = b[i];
        t.dyy(q, i) = c[i];
      }
    }
  }
  return t;
}

}  // namespace rdaocp
