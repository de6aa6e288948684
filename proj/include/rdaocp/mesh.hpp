#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "rdaocp/common.hpp"

namespace rdaocp {

inline constexpr std::size_t kNoElement = std::numeric_limits<std::size_t>::max();

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rectangle {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  [[nodiscard]] double width() const { return x1 - x0; }
  [[nodiscard]] double height() const { return y1 - y0; }
  [[nodiscard]] double area() const { return width() * height(); }
  bool operator==(const Rectangle&) const = default;
};

/// Uniform n x n grid layout. Present on meshes produced by build_uniform;
/// enables arithmetic point location and nested state/control transfers.
struct UniformGrid {
  std::size_t n = 0;
  Rectangle domain;

  [[nodiscard]] double dx() const { return domain.width() / static_cast<double>(n); }
  [[nodiscard]] double dy() const { return domain.height() / static_cast<double>(n); }
  [[nodiscard]] std::size_t element_count() const { return 2 * n * n; }

  /// Vertices of element `k` in the build_uniform numbering (counter-clockwise).
  [[nodiscard]] std::array<Point, 3> element_vertices(std::size_t k) const;
  /// Element containing `x`; points on shared edges resolve to the lower-index square.
  [[nodiscard]] std::size_t locate(const Point& x) const;
};

struct Edge {
  std::array<std::size_t, 2> vertices{};  // sorted ascending
  std::array<std::size_t, 2> elements{kNoElement, kNoElement};
  std::array<Point, 2> normals{};  // outward unit normal w.r.t. elements[i]
  double length = 0.0;

  [[nodiscard]] bool is_boundary() const { return elements[1] == kNoElement; }
};

struct ElementInfo {
  std::array<std::size_t, 3> vertices{};
  std::array<std::size_t, 3> edges{};  // edges[i] joins vertices i and (i+1)%3
  Point barycenter = Point::Zero();
  double diameter = 0.0;
  double area = 0.0;
};

/// Conforming triangulation of a rectangle with full edge/element adjacency.
/// Immutable after construction.
class TriMesh {
 public:
  /// n x n squares, each split along the lower-left to upper-right diagonal.
  static TriMesh build_uniform(std::size_t n, const Rectangle& domain = {});

  /// Red refinement: every triangle split into four through its edge midpoints.
  [[nodiscard]] TriMesh refine_uniform() const;

  /// K itself followed by all elements sharing an edge with K, ascending.
  [[nodiscard]] std::vector<std::size_t> face_neighbors(std::size_t k) const;

  [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t num_elements() const { return elements_.size(); }
  [[nodiscard]] std::size_t num_edges() const { return edges_.size(); }
  [[nodiscard]] std::size_t num_boundary_edges() const;

  [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
  [[nodiscard]] const Point& vertex(std::size_t i) const { return vertices_[i]; }
  [[nodiscard]] const ElementInfo& element(std::size_t k) const { return elements_[k]; }
  [[nodiscard]] const std::vector<ElementInfo>& elements() const { return elements_; }
  [[nodiscard]] const Edge& edge(std::size_t e) const { return edges_[e]; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] std::array<Point, 3> element_vertices(std::size_t k) const;
  [[nodiscard]] Point edge_point(std::size_t e, double t) const;

  [[nodiscard]] const Rectangle& domain() const { return domain_; }
  [[nodiscard]] const std::optional<UniformGrid>& grid() const { return grid_; }

  /// h = max_K h_K.
  [[nodiscard]] double mesh_size() const { return mesh_size_; }
  /// Smallest interior angle over all triangles (radians).
  [[nodiscard]] double min_angle() const { return min_angle_; }
  /// sup_K sup_{e in dK} h_K / h_e.
  [[nodiscard]] double grade_constant() const { return grade_constant_; }

  /// Plain-text node/element listing, one record per line.
  void dump(std::ostream& os) const;

 private:
  TriMesh(std::vector<Point> vertices, std::vector<std::array<std::size_t, 3>> triangles,
          const Rectangle& domain, std::optional<UniformGrid> grid);

  std::vector<Point> vertices_;
  std::vector<ElementInfo> elements_;
  std::vector<Edge> edges_;
  Rectangle domain_;
  std::optional<UniformGrid> grid_;
  double mesh_size_ = 0.0;
  double min_angle_ = 0.0;
  double grade_constant_ = 0.0;
};

}  // namespace rdaocp
