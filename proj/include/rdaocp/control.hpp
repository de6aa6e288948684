#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "rdaocp/ipdg.hpp"

namespace rdaocp {

/// Pointwise functional derivative or density: (x, value) -> number.
using PointwiseFn = std::function<double(const Point&, double)>;

enum class AdmissibleKind { Unconstrained, LowerBound, Box, IntegralLowerBound };

struct AdmissibleSet {
  AdmissibleKind kind = AdmissibleKind::Unconstrained;
  double lower = 0.0;  // gamma (bound or integral bound)
  double upper = 0.0;  // Gamma (Box only)

  static AdmissibleSet unconstrained() { return {}; }
  static AdmissibleSet lower_bound(double gamma) { return {AdmissibleKind::LowerBound, gamma, 0.0}; }
  static AdmissibleSet box(double gamma, double big_gamma) {
    return {AdmissibleKind::Box, gamma, big_gamma};
  }
  static AdmissibleSet integral_lower_bound(double gamma) {
    return {AdmissibleKind::IntegralLowerBound, gamma, 0.0};
  }

  void validate() const;
  /// Pointwise clamp (identity for Unconstrained and IntegralLowerBound).
  [[nodiscard]] double clamp(double v) const;
  [[nodiscard]] bool pointwise() const {
    return kind == AdmissibleKind::LowerBound || kind == AdmissibleKind::Box;
  }
};

std::string to_string(AdmissibleKind kind);

struct ExactSolution {
  ScalarFn y, u, p;
  GradientFn grad_y, grad_p;
};

/// Distributed control problem  min g(y) + j(u)  s.t.  -div(A grad y) = f + c_B u, y = phi on the
/// boundary, u in U_ad, with Omega_u = Omega.
struct ProblemSpec {
  std::string name;
  EllipticCoeffs coeffs;       // A, grad A, f, phi, mu
  double c_B = 1.0;            // B = c_B Id
  PointwiseFn g_prime;         // g'(y)
  PointwiseFn j_prime;         // j'(u)
  PointwiseFn g_density;       // g~(y), optional (objective only)
  PointwiseFn j_density;       // j~(u), optional (objective only)
  double alpha = 1.0;          // strong convexity of j
  double beta = 0.0;           // convexity of g
  AdmissibleSet admissible;
  Rectangle domain;
  std::optional<ExactSolution> exact;

  void validate() const;
};

/// Uniform control triangulation with the same layout as TriMesh::build_uniform, stored
/// implicitly so very fine control meshes stay cheap.
class ControlMesh {
 public:
  ControlMesh(std::size_t n, const Rectangle& domain = {});

  [[nodiscard]] std::size_t n() const { return grid_.n; }
  [[nodiscard]] const UniformGrid& grid() const { return grid_; }
  [[nodiscard]] const Rectangle& domain() const { return grid_.domain; }
  [[nodiscard]] std::size_t num_elements() const { return grid_.element_count(); }
  [[nodiscard]] std::size_t num_nodes() const { return (grid_.n + 1) * (grid_.n + 1); }
  [[nodiscard]] double element_area() const { return 0.5 * grid_.dx() * grid_.dy(); }
  /// h_u = grid spacing 1/n_u on the unit square.
  [[nodiscard]] double spacing() const { return grid_.dx(); }
  [[nodiscard]] std::array<Point, 3> element_vertices(std::size_t c) const {
    return grid_.element_vertices(c);
  }
  [[nodiscard]] std::array<std::size_t, 3> element_nodes(std::size_t c) const;
  [[nodiscard]] Point barycenter(std::size_t c) const;
  [[nodiscard]] Point node(std::size_t i) const;
  [[nodiscard]] std::size_t locate(const Point& x) const { return grid_.locate(x); }
  /// Control elements containing node i (ascending).
  [[nodiscard]] std::vector<std::size_t> node_elements(std::size_t i) const;

 private:
  UniformGrid grid_;
};

enum class ControlMode { PiecewiseConstant, QuadSampled };

/// How j'(u) is evaluated on a piecewise-constant control element.
enum class JPrimeEval { Barycenter, ElementMean };

/// Discrete control space together with the B / B* transfers to the state discretisation.
class ControlSpace {
 public:
  virtual ~ControlSpace() = default;

  [[nodiscard]] virtual ControlMode mode() const = 0;
  /// Number of stored control values.
  [[nodiscard]] virtual std::size_t size() const = 0;
  /// Weights w_i with (u, v)_L2 = sum_i w_i u_i v_i.
  [[nodiscard]] virtual const Vector& weights() const = 0;
  /// Restricted load contribution R^T (c_B u, w_h).
  [[nodiscard]] virtual Vector apply_B(const Vector& u) const = 0;
  /// Representation of c_B p in the control space (element means or point values).
  [[nodiscard]] virtual Vector apply_B_star(const DGField& p) const = 0;
  /// j'(u) in the control representation.
  [[nodiscard]] virtual Vector j_prime(const Vector& u, const PointwiseFn& jp) const = 0;
  /// Pi_h^u f (element means) or point samples of f.
  [[nodiscard]] virtual Vector project(const ScalarFn& f) const = 0;
  /// || f - u ||_L2 with a quadrature adapted to the representation.
  [[nodiscard]] virtual double l2_error(const Vector& u, const ScalarFn& f) const = 0;
  /// int j~(x, u) dx.
  [[nodiscard]] virtual double integrate(const Vector& u, const PointwiseFn& density) const = 0;

  [[nodiscard]] double area() const { return weights().sum(); }
  [[nodiscard]] double integral(const Vector& u) const { return weights().dot(u); }
  [[nodiscard]] double norm(const Vector& u) const;
  [[nodiscard]] double c_B() const { return c_B_; }
  [[nodiscard]] const ReconstructionMatrix& reconstruction() const { return *r_; }
  [[nodiscard]] const std::shared_ptr<const ReconstructionMatrix>& reconstruction_ptr() const {
    return r_;
  }

 protected:
  ControlSpace(std::shared_ptr<const ReconstructionMatrix> r, double c_B);

  std::shared_ptr<const ReconstructionMatrix> r_;
  double c_B_;
};

/// Piecewise constants on a control mesh nested with the state mesh (n | n_u or n_u | n).
class PiecewiseConstantSpace : public ControlSpace {
 public:
  PiecewiseConstantSpace(std::shared_ptr<const ReconstructionMatrix> r,
                         std::shared_ptr<const ControlMesh> control, double c_B,
                         JPrimeEval eval = JPrimeEval::Barycenter);

  [[nodiscard]] ControlMode mode() const override { return ControlMode::PiecewiseConstant; }
  [[nodiscard]] std::size_t size() const override { return control_->num_elements(); }
  [[nodiscard]] const Vector& weights() const override { return weights_; }
  [[nodiscard]] Vector apply_B(const Vector& u) const override;
  [[nodiscard]] Vector apply_B_star(const DGField& p) const override;
  [[nodiscard]] Vector j_prime(const Vector& u, const PointwiseFn& jp) const override;
  [[nodiscard]] Vector project(const ScalarFn& f) const override;
  [[nodiscard]] double l2_error(const Vector& u, const ScalarFn& f) const override;
  [[nodiscard]] double integrate(const Vector& u, const PointwiseFn& density) const override;

  /// Broken (unrestricted) load (c_B u, phi_a^K) for every state element and basis function.
  [[nodiscard]] Vector apply_B_broken(const Vector& u) const;

  [[nodiscard]] const ControlMesh& control_mesh() const { return *control_; }
  [[nodiscard]] const std::shared_ptr<const ControlMesh>& control_mesh_ptr() const {
    return control_;
  }
  [[nodiscard]] JPrimeEval j_prime_eval() const { return eval_; }

  /// Calls fn(K, triangle) for every state/control intersection inside control element c.
  void for_each_piece(std::size_t c,
                      const std::function<void(std::size_t, const std::array<Point, 3>&)>& fn) const;
  /// State element containing the piece, for control elements nested in a state element.
  [[nodiscard]] bool control_is_finer() const { return control_finer_; }

 private:
  struct Piece {
    std::size_t state;
    std::size_t control;
    std::size_t local;  // index into the moment table of the coarse element type
  };
  // Pieces of the coarse element with the given id, in a fixed order.
  void pieces_of_coarse(std::size_t coarse, std::vector<Piece>& out) const;
  [[nodiscard]] std::size_t piece_of_control(std::size_t c, std::size_t& local) const;

  std::shared_ptr<const ControlMesh> control_;
  JPrimeEval eval_;
  bool control_finer_ = true;
  std::size_t ratio_ = 1;
  Vector weights_;
  // moments_[type](local, a) = int_piece phi_a^K for a state element K of the given type
  std::array<Eigen::MatrixXd, 2> moments_;
};

/// Control values stored at the volume quadrature points used by the state assembly.
class QuadSampledSpace : public ControlSpace {
 public:
  QuadSampledSpace(std::shared_ptr<const ReconstructionMatrix> r, double c_B);

  [[nodiscard]] ControlMode mode() const override { return ControlMode::QuadSampled; }
  [[nodiscard]] std::size_t size() const override { return points_.size(); }
  [[nodiscard]] const Vector& weights() const override { return weights_; }
  [[nodiscard]] Vector apply_B(const Vector& u) const override;
  [[nodiscard]] Vector apply_B_star(const DGField& p) const override;
  [[nodiscard]] Vector j_prime(const Vector& u, const PointwiseFn& jp) const override;
  [[nodiscard]] Vector project(const ScalarFn& f) const override;
  [[nodiscard]] double l2_error(const Vector& u, const ScalarFn& f) const override;
  [[nodiscard]] double integrate(const Vector& u, const PointwiseFn& density) const override;

  [[nodiscard]] const std::vector<Point>& points() const { return points_; }
  [[nodiscard]] std::size_t points_per_element() const { return per_element_; }
  [[nodiscard]] int quad_degree() const { return degree_; }

 private:
  int degree_;
  std::size_t per_element_;
  std::vector<Point> points_;
  Vector weights_;
};

struct ControlField {
  std::shared_ptr<const ControlSpace> space;
  Vector values;

  [[nodiscard]] ControlMode mode() const { return space->mode(); }
};

/// L2 projection onto the admissible set within the representation of v.
Vector project_admissible(const ControlSpace& space, const Vector& v, const AdmissibleSet& set);
ControlField project_admissible(const ControlField& v, const AdmissibleSet& set);

/// Pi_h^u: element means (piecewise constants) or point samples (quadrature mode).
ControlField l2_project_control(const std::shared_ptr<const ControlSpace>& space, const ScalarFn& f);

/// Element means of f over the control mesh with a degree-`degree` rule.
Vector element_means(const ControlMesh& mesh, const ScalarFn& f, int degree = 4);

}  // namespace rdaocp
