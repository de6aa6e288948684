#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rdaocp/pgd.hpp"

namespace rdaocp {

/// Element residual indicator h~_K^2 ||source + div(A grad field)||_K with h~_K = h_K / mu.
/// `quad_degree` <= 0 selects 2m+4.
Vector eta_volume(const DGField& field, const VolumeSource& source, const EllipticCoeffs& coeffs,
                  int quad_degree = -1);

struct JumpIndicators {
  Vector eta2;  // per edge: h~_e^{1/2} ||[field]||_e (boundary: field - boundary data)
  Vector eta3;  // per edge: h~_e^{3/2} ||[A grad field]||_e, zero on boundary edges
};

/// `boundary` is the Dirichlet datum subtracted on boundary edges (empty: zero).
JumpIndicators eta_jumps(const DGField& field, const EllipticCoeffs& coeffs,
                         const ScalarFn& boundary = nullptr);

enum class ControlEstimate { General, Sharp };

/// Classification of a control element relative to the bounds.
enum class ActiveLabel : std::uint8_t {
  Inactive,      // strictly inside the bounds
  Active,        // at a bound, sign condition fails somewhere on the element
  ActiveSigned,  // at a bound and the sign condition holds on the whole element
};

struct ControlIndicator {
  double eta0 = 0.0;        // general: ||(I - Pi)(j'(u) + B* p)||
  double eta0_sharp = 0.0;  // sharp: ||j'(u) + B* p|| off the signed active set
  double eta_star = 0.0;    // diagnostic with exact data, NaN without it
  Vector eta0_elements;     // per control element squared contributions (mode dependent)
  std::vector<ActiveLabel> labels;  // sharp mode only
};

/// Control indicator for a piecewise-constant control. Sharp mode needs pointwise bounds.
ControlIndicator eta_control(const OcpDiscretization& disc, const Vector& u, const DGField& p,
                             ControlEstimate mode, double bound_tol = 1e-10);

struct IndicatorReport {
  Vector eta1_y, eta1_p;
  JumpIndicators jumps_y, jumps_p;
  ControlIndicator control;
  bool has_control = false;

  [[nodiscard]] double eta1_y_total() const { return eta1_y.norm(); }
  [[nodiscard]] double eta1_p_total() const { return eta1_p.norm(); }
  [[nodiscard]] double eta2_y_total() const { return jumps_y.eta2.norm(); }
  [[nodiscard]] double eta3_y_total() const { return jumps_y.eta3.norm(); }
  [[nodiscard]] double eta2_p_total() const { return jumps_p.eta2.norm(); }
  [[nodiscard]] double eta3_p_total() const { return jumps_p.eta3.norm(); }
  /// Root-sum-square of eta_0 (or its sharp variant) and all state and adjoint indicators.
  [[nodiscard]] double total(ControlEstimate mode) const;
};

/// All indicators for a computed solution. The control part needs a piecewise-constant space.
IndicatorReport compute_indicators(const OcpDiscretization& disc, const OcpSolution& sol,
                                   ControlEstimate mode = ControlEstimate::General);

/// Continuous piecewise-linear function given by nodal values on a control mesh.
struct RecoveredControl {
  std::shared_ptr<const ControlMesh> mesh;
  Vector nodal;
  std::vector<char> fallback;  // nodes that used the enlarged patch

  [[nodiscard]] double value(std::size_t c, const Point& x) const;
  [[nodiscard]] double value_at(const Point& x) const { return value(mesh->locate(x), x); }
  /// Composite quadrature: each control element is split into s x s similar triangles, which
  /// keeps the error measure accurate when f has a kink inside an element.
  [[nodiscard]] double l2_error(const ScalarFn& f, int quad_degree = 6, int subdivisions = 4) const;
};

/// Area-weighted least-squares fit of the element means around every node.
RecoveredControl zz_recover(std::shared_ptr<const ControlMesh> mesh, const Vector& u);

struct EffectivityReport {
  Vector e_y, e_p;  // per state element
  Vector e_u;       // per control element
  Vector err_y, err_p, err_u;  // local errors (squared)

  [[nodiscard]] static double max_of(const Vector& v) { return v.size() ? v.maxCoeff() : 0.0; }
  /// Smallest nonzero ratio (zero ratios mark vanishing local errors).
  [[nodiscard]] static double min_positive(const Vector& v);
};

/// e_K ratios (zero when the local error vanishes).
EffectivityReport effectivity(const OcpDiscretization& disc, const OcpSolution& sol,
                              const IndicatorReport& report);

}  // namespace rdaocp
