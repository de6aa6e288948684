#include "rdaocp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <unordered_map>

namespace rdaocp {

std::array<Point, 3> UniformGrid::element_vertices(std::size_t k) const {
  const std::size_t square = k / 2;
  const std::size_t i = square % n;
  const std::size_t j = square / n;
  const double xa = domain.x0 + static_cast<double>(i) * dx();
  const double xb = i + 1 == n ? domain.x1 : domain.x0 + static_cast<double>(i + 1) * dx();
  const double ya = domain.y0 + static_cast<double>(j) * dy();
  const double yb = j + 1 == n ? domain.y1 : domain.y0 + static_cast<double>(j + 1) * dy();
  if (k % 2 == 0) return {Point(xa, ya), Point(xb, ya), Point(xb, yb)};
  return {Point(xa, ya), Point(xb, yb), Point(xa, yb)};
}

std::size_t UniformGrid::locate(const Point& x) const {
  const double sx = (x.x() - domain.x0) / dx();
  const double sy = (x.y() - domain.y0) / dy();
  const auto last = static_cast<double>(n - 1);
  const double fi = std::clamp(std::floor(sx), 0.0, last);
  const double fj = std::clamp(std::floor(sy), 0.0, last);
  const bool lower = (sy - fj) <= (sx - fi);
  const auto i = static_cast<std::size_t>(fi);
  const auto j = static_cast<std::size_t>(fj);
  return 2 * (j * n + i) + (lower ? 0 : 1);
}

TriMesh TriMesh::build_uniform(std::size_t n, const Rectangle& domain) {
  if (n == 0) throw InvalidArgument("build_uniform: n must be at least 1");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
    throw InvalidArgument("build_uniform: degenerate rectangle (zero or negative extent)");

  const UniformGrid grid{n, domain};
  std::vector<Point> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      vertices.emplace_back(domain.x0 + static_cast<double>(i) * grid.dx(),
                            domain.y0 + static_cast<double>(j) * grid.dy());
  // snap the far edges exactly onto the rectangle
  for (std::size_t j = 0; j <= n; ++j) vertices[j * (n + 1) + n].x() = domain.x1;
  for (std::size_t i = 0; i <= n; ++i) vertices[n * (n + 1) + i].y() = domain.y1;

  std::vector<std::array<std::size_t, 3>> triangles;
  triangles.reserve(2 * n * n);
  const auto vid = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return TriMesh(std::move(vertices), std::move(triangles), domain, grid);
}

TriMesh TriMesh::refine_uniform() const {
  std::vector<Point> vertices = vertices_;
  const std::size_t nv = vertices.size();
  vertices.reserve(nv + edges_.size());
  for (const Edge& e : edges_)
    vertices.push_back(0.5 * (vertices_[e.vertices[0]] + vertices_[e.vertices[1]]));

  std::vector<std::array<std::size_t, 3>> triangles;
  triangles.reserve(4 * elements_.size());
  for (const ElementInfo& el : elements_) {
    const auto [a, b, c] = el.vertices;
    const std::size_t ab = nv + el.edges[0];
    const std::size_t bc = nv + el.edges[1];
    const std::size_t ca = nv + el.edges[2];
    triangles.push_back({a, ab, ca});
    triangles.push_back({ab, b, bc});
    triangles.push_back({ca, bc, c});
    triangles.push_back({ab, bc, ca});
  }
  return TriMesh(std::move(vertices), std::move(triangles), domain_, std::nullopt);
}

TriMesh::TriMesh(std::vector<Point> vertices, std::vector<std::array<std::size_t, 3>> triangles,
                 const Rectangle& domain, std::optional<UniformGrid> grid)
    : vertices_(std::move(vertices)), domain_(domain), grid_(grid) {
  const std::size_t nv = vertices_.size();
  elements_.resize(triangles.size());
  edges_.reserve(triangles.size() * 3 / 2 + nv);

  std::unordered_map<std::uint64_t, std::size_t> edge_ids;
  edge_ids.reserve(triangles.size() * 2);
  min_angle_ = std::numbers::pi;

  for (std::size_t k = 0; k < triangles.size(); ++k) {
    ElementInfo& el = elements_[k];
    el.vertices = triangles[k];
    const Point& p0 = vertices_[el.vertices[0]];
    const Point& p1 = vertices_[el.vertices[1]];
    const Point& p2 = vertices_[el.vertices[2]];
    const Point d1 = p1 - p0;
    const Point d2 = p2 - p0;
    el.area = 0.5 * (d1.x() * d2.y() - d1.y() * d2.x());
    if (!(el.area > 0.0))
      throw InvalidArgument("TriMesh: element " + std::to_string(k) +
                            " has non-positive area (not counter-clockwise)");
    el.barycenter = (p0 + p1 + p2) / 3.0;

    for (int i = 0; i < 3; ++i) {
      const std::size_t va = el.vertices[i];
      const std::size_t vb = el.vertices[(i + 1) % 3];
      const std::size_t lo = std::min(va, vb);
      const std::size_t hi = std::max(va, vb);
      const std::uint64_t key = static_cast<std::uint64_t>(lo) * nv + hi;
      const Point tangent = vertices_[vb] - vertices_[va];
      const double len = tangent.norm();
      // counter-clockwise orientation: outward normal is the tangent rotated clockwise
      const Point normal(tangent.y() / len, -tangent.x() / len);
      el.diameter = std::max(el.diameter, len);

      auto [it, inserted] = edge_ids.try_emplace(key, edges_.size());
      if (inserted) {
        Edge e;
        e.vertices = {lo, hi};
        e.elements[0] = k;
        e.normals[0] = normal;
        e.length = len;
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.elements[1] != kNoElement)
          throw InvalidArgument("TriMesh: edge shared by more than two elements");
        e.elements[1] = k;
        e.normals[1] = normal;
      }
      el.edges[i] = it->second;

      const Point u = vertices_[vb] - vertices_[va];
      const Point v = vertices_[el.vertices[(i + 2) % 3]] - vertices_[va];
      const double angle = std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
      min_angle_ = std::min(min_angle_, angle);
    }
  }

  for (const ElementInfo& el : elements_) {
    mesh_size_ = std::max(mesh_size_, el.diameter);
    for (std::size_t e : el.edges)
      grade_constant_ = std::max(grade_constant_, el.diameter / edges_[e].length);
  }
}

std::size_t TriMesh::num_boundary_edges() const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.is_boundary(); }));
}

std::vector<std::size_t> TriMesh::face_neighbors(std::size_t k) const {
  if (k >= elements_.size())
    throw InvalidArgument("face_neighbors: invalid element id " + std::to_string(k));
  std::vector<std::size_t> result;
  result.reserve(4);
  for (std::size_t e : elements_[k].edges) {
    const Edge& edge = edges_[e];
    if (edge.is_boundary()) continue;
    result.push_back(edge.elements[0] == k ? edge.elements[1] : edge.elements[0]);
  }
  std::sort(result.begin(), result.end());
  result.insert(result.begin(), k);
  return result;
}

std::array<Point, 3> TriMesh::element_vertices(std::size_t k) const {
  const auto& v = elements_[k].vertices;
  return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]};
}

Point TriMesh::edge_point(std::size_t e, double t) const {
  const Edge& edge = edges_[e];
  return (1.0 - t) * vertices_[edge.vertices[0]] + t * vertices_[edge.vertices[1]];
}

void TriMesh::dump(std::ostream& os) const {
  os << "# vertices " << vertices_.size() << '\n';
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    os << i << ' ' << vertices_[i].x() << ' ' << vertices_[i].y() << '\n';
  os << "# elements " << elements_.size() << '\n';
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const auto& v = elements_[k].vertices;
    os << k << ' ' << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  }
  os.precision(old);
}

}  // namespace rdaocp
