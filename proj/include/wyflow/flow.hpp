#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "wyflow/conformal.hpp"
#include "wyflow/trace.hpp"

namespace wyflow {

enum class Stepper { ExplicitEuler, SemiImplicit };
enum class DtPolicy { Fixed, Adaptive };
enum class CaseLabel { Positive, Zero, Negative };

Stepper parse_stepper(std::string_view id);
std::string_view stepper_id(Stepper s);
DtPolicy parse_dt_policy(std::string_view id);
std::string_view dt_policy_id(DtPolicy p);
CaseLabel parse_case_label(std::string_view id);
std::string_view case_label_id(CaseLabel c);

struct FlowConfig {
  Stepper stepper = Stepper::ExplicitEuler;
  DtPolicy dt_policy = DtPolicy::Adaptive;
  double dt = 1e-4;     // used by the fixed policy
  double s_cfl = 0.2;   // safety factor of the adaptive policy
  double tol_conv = 1e-6;      // stop when sup|R - r| < tol_conv (1 + |r|)
  double tol_residual = 1e-5;  // steady-state residual required for convergence
  long max_steps = 1'000'000;
  bool renormalize = true;
  long monitor_stride = 100;
  std::optional<double> p_lyapunov;  // default: midpoint of the admissible interval
  std::optional<double> sigma;       // default: max{sup(1 - R(0)), 1}

  /// Throws std::invalid_argument when a field is out of range for (n, m).
  void validate(int n, double m) const;
  /// Admissible open interval (max{(n+m)/2, 2}, (n+m+2)/2) for the L^p exponent.
  static std::pair<double, double> lyapunov_interval(int n, double m);
  [[nodiscard]] double lyapunov_exponent(int n, double m) const;
};

/// Aggregates over every accepted step (not only monitored rows).
struct FlowAudit {
  double r0 = 0.0;
  double min_R0 = 0.0;
  double max_r_increase = 0.0;       // max (r_{k+1} - r_k) / (1 + |r_k|)
  double min_max_principle_margin = 0.0;  // min (min R - min{min R0, 0}) / (1 + |min R0|)
  double max_volume_step_drift = 0.0;     // max |V_raw(k+1) - V(k)|
  double max_volume_deviation = 0.0;      // max |V(k) - 1| after the step
  double min_w = 0.0;
  double min_harnack_gap = 0.0;           // min (ratio_min - ratio_max)
  bool crossed_zero = false;              // r went from >= 0 to < 0
  long crossing_step = -1;
  double crossing_time = 0.0;
  double r_at_crossing = 0.0;
  double w_max_pow_at_crossing = 0.0;     // w_max^{N-1} at the crossing
  double max_w_pow_after_crossing = 0.0;  // max_t w_max^{N-1} after the crossing
  double max_abs_dt = 0.0;
};

struct FlowResult {
  Field w_final;
  bool converged = false;
  long steps_taken = 0;
  double final_time = 0.0;
  double r_inf_estimate = 0.0;
  double steady_residual = 0.0;
  double final_sup_dev = 0.0;
  CaseLabel case_label = CaseLabel::Zero;
  double sigma = 1.0;
  double p_lyapunov = 0.0;
  double wall_time_seconds = 0.0;
  FlowAudit audit;
};

/// Data passed to a step observer after every accepted step.
struct StepEvent {
  long step;
  double t;
  double dt;
  double volume_raw;
  const ConformalState& before;
  const ConformalState& after;
};
using StepObserver = std::function<void(const StepEvent&)>;

/// Raised when a step produces a nonpositive conformal factor.
class BlowDownError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Step size chosen by the configured policy for the current state.
double choose_dt(const Background& bg, const ConformalState& state, const FlowConfig& config);

/// Sets boundary values so the one-sided normal derivative vanishes.
Field project_neumann(const Background& bg, Field w);

/// One time step of ∂w/∂t = -((n+m-2)/4)(R - r) w with zero Neumann data.
/// Writes the pre-renormalization volume into `volume_raw` when non-null.
ConformalState step(const Background& bg, const ConformalState& state, double dt, const FlowConfig& config,
                    double* volume_raw = nullptr);

/// Max-norm of alpha Δ_{φ0}w - R^m_{φ0} w + r w^{p_crit}, divided by max w.
double steady_residual(const Background& bg, const ConformalState& state);

/// Runs the flow from w0 (made Neumann-compatible and volume-normalized first).
/// Non-convergence within max_steps is reported through converged = false.
std::pair<FlowResult, FlowTrace> run(const Background& bg, const Field& w0, const FlowConfig& config,
                                     const StepObserver& observer = {});

struct InitialData {
  double min_R0;
  double r0;
};

struct IdentityRecord {
  double dr_dt;               // (r_next - r_prev) / dt
  double dissipation;         // ((n+m-2)/2) ∫ (r - R)² e^{-φ} dV_g at the midpoint state
  double dr_dt_residual;      // |dr_dt + dissipation|
  double min_R_margin;        // min R(next) - min{min R0, 0}
  double dphi_dt_margin;      // min (Δφ/Δt) - (m/2)(min R0 - r0)
};

IdentityRecord monitor_identities(const Background& bg, const ConformalState& prev, const ConformalState& next,
                                  double dt, const InitialData& initial);

/// σ = max{sup(1 - R(0)), 1}.
double sigma_from_initial(const Field& R0);

/// Λ_p = ∫ (R + σ)^{p-1} e^{-φ} dV_g. Throws std::domain_error if R + σ <= 0 somewhere.
double lyapunov_lp(const Background& bg, const ConformalState& state, double p, double sigma);

/// (w_min^N(t)/w_min^N(0), w_max^N(t)/w_max^N(0)) per trace row.
std::vector<std::pair<double, double>> harnack_ratios(const FlowTrace& trace, double p_crit);

struct BarrierRecord {
  bool crossing_reached = false;
  double crossing_time = 0.0;
  double min_w_over_run = 0.0;
  bool lower_barrier_holds = false;
  double upper_bound = 0.0;       // (1 + slack) max{w_max^{N-1}(t0), max|R_bg| / |r(t0)|}
  double worst_upper_ratio = 0.0; // max_t w_max^{N-1}(t) / upper_bound after t0
  bool upper_barrier_holds = false;
};

BarrierRecord negative_case_barriers(const FlowTrace& trace, const Background& bg, double slack = 0.5);

}  // namespace wyflow
