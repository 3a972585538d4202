#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "wyflow/background.hpp"
#include "wyflow/flow.hpp"
#include "wyflow/spectral.hpp"

namespace wyflow::oracle {

/// Errors against mesh size with the order fitted by log-log least squares.
struct RefinementReport {
  std::vector<double> h;
  std::vector<double> errors;
  double order = 0.0;
};

/// Fits error ~ C h^order. Throws std::invalid_argument with fewer than three sizes
/// or a nonpositive entry.
RefinementReport fit_order(std::vector<double> h, std::vector<double> errors);

/// Scalar curvature of the evolved pair (g, φ) = (e^{2s}g0, φ0 - m s), s = (2/(n+m-2)) ln w,
/// evaluated directly from its definition with independent finite differences.
/// flat_interval only.
Field direct_curvature(const Background& bg, const Field& w);

/// |∫<∇f,∇u> dμ + ∫ f Δ_{φ0}u dμ - ∮ f ∂u/∂ν dA| with central-difference gradients and
/// trapezoid weights built from the closed-form density.
double ibp_residual(const Background& bg, const Field& f, const Field& u);

// Largest residual over the pairings (f, u), (u, f) and (f, f) of two test fields.
double ibp_pair_residual(const Background& bg, const Field& f, const Field& u);

/// Dense generalized solve of alpha Δ_{φ0}ψ - R^m_{φ0}ψ + λ ρ ψ = 0, assembled column by
/// column from the weighted Laplacian. At most 512 nodes.
Spectrum dense_reference_spectrum(const Background& bg, const Field& rho, std::size_t k);

/// Smooth function with zero normal derivative on every catalog grid:
///   Σ_{a,b} c_ab cos(aπ(x - x0)/Lx) cos(bπ(y - y0)/Ly).
class TrigField {
 public:
  /// Coefficients uniform in [-1, 1] damped by 1/(1 + a + b)² from a seeded mt19937_64.
  static TrigField random(const Background& bg, std::uint64_t seed, int modes = 4);
  TrigField(std::vector<std::vector<double>> coeffs, double x0, double lx, double y0, double ly);

  [[nodiscard]] double operator()(double x, double y) const;
  [[nodiscard]] Field on(const Background& bg) const;

 private:
  std::vector<std::vector<double>> coeffs_;
  double x0_, lx_, y0_, ly_;
};

/// Residuals of the dr/dt identity over a common time window at dt and dt/2.
struct DrDtCrosscheck {
  double coarse = 0.0;  // mean relative residual over `steps` steps of size dt
  double fine = 0.0;    // mean relative residual over 2·steps steps of size dt/2
  double ratio = 0.0;   // coarse / fine, meaningful only when `defined`
  bool defined = false; // false when the fine residual is at roundoff level (steady state)
};

/// Runs both step sizes from w0 with a fixed policy and renormalization as configured.
/// The residual of one step is |Δr/Δt + ((n+m-2)/2) Σ μ (r - R)² w^{p_vol} / V| at the
/// midpoint state, divided by max(|Δr/Δt|, tiny).
DrDtCrosscheck dr_dt_crosscheck(const Background& bg, const Field& w0, FlowConfig config, double dt, int steps);

/// Builds the same background family at each mesh size and fits the order of `error`.
RefinementReport refinement_study(const std::vector<std::size_t>& meshes,
                                  const std::function<Background(std::size_t)>& build,
                                  const std::function<double(const Background&)>& error);

}  // namespace wyflow::oracle
