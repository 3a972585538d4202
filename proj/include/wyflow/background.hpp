#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wyflow/field.hpp"

namespace wyflow {

enum class Family { FlatInterval, FlatRectangle, SphericalCap, HyperbolicBall };

Family parse_family(std::string_view id);
std::string_view family_id(Family family);

/// Absolute tolerance for the H^m_{φ0} = 0 boundary compatibility check.
inline constexpr double kBoundaryCompatibilityTol = 1e-10;

/// Named real parameters of a background family.
///
/// The measure potential is
///   flat_interval, spherical_cap, hyperbolic_ball:
///     φ0(s) = phi_shift + phi_amp·cos(phi_freq·π·s/L) + phi_quad·s²
///   flat_rectangle:
///     φ0(x,y) = phi_shift + phi_amp·cos(phi_freq·π·x/lx)·cos(phi_freq_y·π·y/ly)
/// where s is the coordinate measured from the pole (or from the left end) and L the
/// extent. For the radial families phi_quad defaults to the value that cancels the
/// boundary mean curvature, so the background satisfies H^m_{φ0} = 0.
struct FamilyParams {
  int n = 3;
  double m = 1.0;
  double length = 1.0;
  double lx = 1.0;
  double ly = 1.0;
  double theta0 = 1.5707963267948966;
  double rho0 = 1.0;
  double phi_amp = 0.0;
  double phi_freq = 2.0;
  double phi_freq_y = 0.0;
  double phi_shift = 0.0;
  std::optional<double> phi_quad;

  /// Unknown keys are an error.
  static FamilyParams from_map(const std::map<std::string, double>& values);
  [[nodiscard]] std::map<std::string, double> to_map() const;
};

/// One true-boundary sample: the node, the axis of the outward normal and its sign,
/// and the quadrature weight realizing e^{-φ0} dA_{g0}.
struct BoundaryPoint {
  std::size_t node;
  int axis;
  int sign;
  double weight;
};

/// Face of the dual (finite-volume) mesh between two neighbouring nodes.
/// conductance = (face measure of e^{-φ0}dV_{g0}) / spacing.
struct Edge {
  std::size_t a;
  std::size_t b;
  double conductance;
};

/// Closed-form data of g0 and φ0 along the reduced coordinate(s).
struct MetricData {
  /// Warping function f with g0 = ds² + f(s)² g_{S^{n-1}} (f ≡ 1 for flat grids).
  double (*warp)(double) = nullptr;
  double (*warp_derivative)(double) = nullptr;
  double scalar_curvature = 0.0;   // R_{g0}, constant on every catalog family
  double boundary_mean_curvature = 0.0;  // H_{g0} at the true boundary (radial families)
  double sphere_area = 1.0;        // |S^{n-1}| for radial families, 1 for flat
};

/// Derivatives of the closed-form φ0 at a point.
struct PhiSample {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dxx = 0.0;
  double dyy = 0.0;
};

/// Discretized smooth metric measure space with boundary.
class Background {
 public:
  [[nodiscard]] Family family() const { return family_; }
  [[nodiscard]] const FamilyParams& params() const { return params_; }
  [[nodiscard]] const GridSpec& grid() const { return grid_; }
  [[nodiscard]] int n() const { return params_.n; }
  [[nodiscard]] double m() const { return params_.m; }
  [[nodiscard]] std::size_t size() const { return grid_.node_count(); }
  [[nodiscard]] const MetricData& metric() const { return metric_; }
  [[nodiscard]] const Field& phi0() const { return phi0_; }
  /// Node quadrature weights μ (dual-cell integrals of e^{-φ0} dV_{g0}).
  [[nodiscard]] std::span<const double> mu() const { return mu_; }
  [[nodiscard]] std::span<const Edge> edges() const { return edges_; }
  [[nodiscard]] std::span<const BoundaryPoint> boundary() const { return boundary_; }
  /// R^m_{φ0} at every node.
  [[nodiscard]] const Field& R_bg() const { return R_bg_; }
  /// H^m_{φ0} at every boundary point.
  [[nodiscard]] std::span<const double> H_bg() const { return H_bg_; }
  /// The quadratic coefficient actually used for φ0 (after defaulting).
  [[nodiscard]] double phi_quad() const { return phi_quad_; }

  /// Closed-form φ0 and its derivatives at a coordinate.
  [[nodiscard]] PhiSample phi_at(double x, double y = 0.0) const;
  /// Closed-form density e^{-φ0}·ω·|S^{n-1}| of the reduced volume element.
  [[nodiscard]] double density_at(double x, double y = 0.0) const;

 private:
  friend Background build_background(Family, const FamilyParams&, std::size_t);
  Family family_ = Family::FlatInterval;
  FamilyParams params_;
  GridSpec grid_;
  MetricData metric_;
  double phi_quad_ = 0.0;
  Field phi0_;
  std::vector<double> mu_;
  std::vector<Edge> edges_;
  std::vector<BoundaryPoint> boundary_;
  Field R_bg_;
  std::vector<double> H_bg_;
};

/// Builds a catalog background on a grid with `nodes_per_axis` nodes per axis.
/// Throws std::invalid_argument for n < 3, m < 0, m = 0 with φ0 ≢ 0, a grid with
/// fewer than 16 nodes, or a φ0 whose normal derivative does not cancel H_{g0}.
Background build_background(Family family, const FamilyParams& params, std::size_t nodes_per_axis);
Background build_background(std::string_view family, const std::map<std::string, double>& params,
                            std::size_t nodes_per_axis);

/// Δ_{φ0}u with the Neumann condition imposed by zero flux through the true boundary
/// (equivalently: even ghost reflection) and even reflection at the symmetry axis.
Field weighted_laplacian(const Background& bg, const Field& u);
/// Unchecked kernel used on hot paths; `out` must have bg.size() entries.
void apply_weighted_laplacian(const Background& bg, std::span<const double> u, std::span<double> out);

Field background_weighted_scalar_curvature(const Background& bg);
std::vector<double> background_weighted_mean_curvature(const Background& bg);

/// Σ μ_i u_i, summed pairwise.
double integrate(const Background& bg, const Field& u);
double integrate_boundary(const Background& bg, std::span<const double> boundary_values);

/// One-sided second-order outward normal derivative at every boundary point.
std::vector<double> normal_derivative(const Background& bg, const Field& u);

/// Samples a function of the node coordinates.
template <class F>
Field sample(const Background& bg, F&& f) {
  const GridSpec& g = bg.grid();
  Field out(g.node_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(g.coordinate(i, 0), g.coordinate(i, 1));
  return out;
}

}  // namespace wyflow
