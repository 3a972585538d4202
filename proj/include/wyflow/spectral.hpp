#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "wyflow/background.hpp"
#include "wyflow/flow.hpp"
#include "wyflow/trace.hpp"

namespace wyflow {

struct EigenPair {
  double lambda = 0.0;
  Field psi;
};

/// Eigenpairs ascending in lambda, ρ-orthonormal: Σ μ ρ ψ_a ψ_b = δ_ab.
struct Spectrum {
  std::vector<EigenPair> pairs;
  Field rho;
  std::vector<double> residuals;  // ‖Kψ - λ M_ρ ψ‖ / ‖ψ‖ per pair
};

struct LowModeSet {
  std::vector<std::size_t> indices;
  double threshold = 0.0;
};

/// Generalized symmetric eigenproblem K ψ = λ M_ρ ψ for
/// alpha Δ_{φ0}ψ - R^m_{φ0}ψ + λ ρ ψ = 0 with zero Neumann data, ρ = w^{p_metric}.
struct LinearizedOperator {
  Eigen::SparseMatrix<double> stiffness;  // μ(-alpha Δ_{φ0} + R^m_{φ0}), assembled row by row
  std::vector<double> mass;               // μ ρ
  Field rho;
  bool banded_1d = false;                 // tridiagonal structure
};

LinearizedOperator assemble_linearized(const Background& bg, const Field& w_inf);

/// max |K_ij - K_ji| / max |K_ij|.
double symmetry_residual(const LinearizedOperator& op);

/// First k eigenpairs. Throws std::invalid_argument for k outside [1, size] and
/// std::runtime_error when the eigensolver fails.
Spectrum eigensolve(const LinearizedOperator& op, std::size_t k);

/// Gram matrix G_ab = Σ μ ρ ψ_a ψ_b.
std::vector<std::vector<double>> rho_gram(const Background& bg, const Spectrum& spectrum);

struct Classification {
  CaseLabel label = CaseLabel::Zero;
  double lambda0 = 0.0;  // first eigenvalue of (L^m_{φ0}, Neumann)
  double lambda1 = 0.0;
};

/// Sign of the first eigenvalue of L^m_{φ0} with zero band |λ0| <= 1e-8 (1 + |λ1|).
Classification classify_sign(const Background& bg);

/// {a : λ_a <= p_crit r_inf}. Throws if every computed eigenvalue is below the threshold
/// (the set might be incomplete).
LowModeSet low_mode_set(const Spectrum& spectrum, double r_inf, double p_crit);

/// Πf = f - Σ_{a∈A} (∫ ψ_a f e^{-φ0} dV) ρ ψ_a.
Field project_low_modes(const Background& bg, const Spectrum& spectrum, const LowModeSet& modes, const Field& f);

struct DecayFit {
  double beta = 0.0;        // r - r_inf ~ t^{-beta}
  double gamma = 0.0;       // (1 - beta) / (1 + beta)
  double fit_residual = 0.0;  // RMS of the log-log least-squares fit
  std::size_t rows_used = 0;
  double beta_early = 0.0;  // slope over the first half of the usable rows
  double beta_late = 0.0;   // slope over the second half
  bool super_polynomial = false;  // slope grows with the window (faster than any power)
};

/// Least-squares fit of log(r - r_inf) against log t over rows with r - r_inf > 10 tol_conv.
/// Throws std::invalid_argument with fewer than 50 usable rows.
DecayFit fit_decay_exponent(const FlowTrace& trace, double r_inf, double tol_conv);

/// Minimum of c_R^{-1}·E over {w, constants, shifted ground state of L^m_{φ0}},
/// in curvature units so that it compares directly with r.
double rayleigh_lower_bound(const Background& bg, const Field& w);

}  // namespace wyflow
