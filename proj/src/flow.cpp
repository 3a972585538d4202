#include "wyflow/flow.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "wyflow/spectral.hpp"

namespace wyflow {

Stepper parse_stepper(std::string_view id) {
  if (id == "explicit-euler" || id == "explicit") return Stepper::ExplicitEuler;
  if (id == "semi-implicit") return Stepper::SemiImplicit;
  throw std::invalid_argument("unknown stepper '" + std::string(id) + "'");
}

std::string_view stepper_id(Stepper s) { return s == Stepper::ExplicitEuler ? "explicit-euler" : "semi-implicit"; }

DtPolicy parse_dt_policy(std::string_view id) {
  if (id == "fixed") return DtPolicy::Fixed;
  if (id == "adaptive") return DtPolicy::Adaptive;
  throw std::invalid_argument("unknown dt policy '" + std::string(id) + "'");
}

std::string_view dt_policy_id(DtPolicy p) { return p == DtPolicy::Fixed ? "fixed" : "adaptive"; }

CaseLabel parse_case_label(std::string_view id) {
  if (id == "positive") return CaseLabel::Positive;
  if (id == "zero") return CaseLabel::Zero;
  if (id == "negative") return CaseLabel::Negative;
  throw std::invalid_argument("unknown case label '" + std::string(id) + "'");
}

std::string_view case_label_id(CaseLabel c) {
  switch (c) {
    case CaseLabel::Positive: return "positive";
    case CaseLabel::Zero: return "zero";
    case CaseLabel::Negative: return "negative";
  }
  return "zero";
}

std::pair<double, double> FlowConfig::lyapunov_interval(int n, double m) {
  const double k = n + m;
  return {std::max(0.5 * k, 2.0), 0.5 * (k + 2.0)};
}

double FlowConfig::lyapunov_exponent(int n, double m) const {
  if (p_lyapunov) return *p_lyapunov;
  const auto [lo, hi] = lyapunov_interval(n, m);
  return 0.5 * (lo + hi);
}

void FlowConfig::validate(int n, double m) const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(s_cfl > 0.0)) throw std::invalid_argument("s_cfl must be positive");
  if (!(tol_conv > 0.0)) throw std::invalid_argument("tol_conv must be positive");
  if (!(tol_residual > 0.0)) throw std::invalid_argument("tol_residual must be positive");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (monitor_stride < 1) throw std::invalid_argument("monitor_stride must be >= 1");
  const auto [lo, hi] = lyapunov_interval(n, m);
  const double p = lyapunov_exponent(n, m);
  if (!(p > lo && p < hi)) {
    std::ostringstream os;
    os << "p_lyapunov = " << p << " outside the admissible interval (" << lo << ", " << hi << ")";
    throw std::invalid_argument(os.str());
  }
  if (sigma && !(*sigma >= 1.0)) throw std::invalid_argument("sigma must be >= 1");
}

double choose_dt(const Background& bg, const ConformalState& state, const FlowConfig& config) {
  if (config.dt_policy == DtPolicy::Fixed) return config.dt;
  const Exponents& e = state.exponents();
  const double h = bg.grid().min_spacing();
  const double k = bg.n() + bg.m();
  // Diffusivity of the linearized flow is (n+m-1) w^{-p_metric}; keep the parabolic
  // bound s_cfl h²/alpha for n+m <= 4 and tighten it for larger n+m and small w.
  const double stiffness = std::max(1.0, 0.5 * (k - 2.0)) * bg.grid().dimension();
  const double w_factor = std::min(1.0, std::pow(state.w().min(), e.p_metric));
  return config.s_cfl * h * h * w_factor / (e.alpha * stiffness);
}

Field project_neumann(const Background& bg, Field w) {
  require_same_size(w, bg.size(), "project_neumann");
  const GridSpec& g = bg.grid();
  for (const BoundaryPoint& b : bg.boundary()) {
    const std::size_t stride = b.axis == 0 ? 1 : g.counts[0];
    const std::size_t k1 = b.sign > 0 ? b.node - stride : b.node + stride;
    const std::size_t k2 = b.sign > 0 ? b.node - 2 * stride : b.node + 2 * stride;
    w[b.node] = (4.0 * w[k1] - w[k2]) / 3.0;
  }
  return w;
}

namespace {

// Solves (diag + coef·K_lap) x = rhs, where K_lap = -μΔ_{φ0} is the symmetric
// positive semidefinite stiffness of the background.
std::vector<double> solve_shifted_stiffness(const Background& bg, const std::vector<double>& diag, double coef,
                                            const std::vector<double>& rhs) {
  const std::size_t N = bg.size();
  if (bg.grid().dimension() == 1) {
    // Edges are (i, i+1) in order: tridiagonal Thomas sweep.
    std::vector<double> a(N, 0.0), b(diag), c(N, 0.0);
    for (const Edge& e : bg.edges()) {
      const double v = coef * e.conductance;
      b[e.a] += v;
      b[e.b] += v;
      c[e.a] = -v;
      a[e.b] = -v;
    }
    std::vector<double> cp(N), dp(N), x(N);
    if (!(b[0] > 0.0)) throw std::runtime_error("semi-implicit solve: nonpositive pivot");
    cp[0] = c[0] / b[0];
    dp[0] = rhs[0] / b[0];
    for (std::size_t i = 1; i < N; ++i) {
      const double denom = b[i] - a[i] * cp[i - 1];
      if (!(denom > 0.0) || !std::isfinite(denom)) throw std::runtime_error("semi-implicit solve: nonpositive pivot");
      cp[i] = c[i] / denom;
      dp[i] = (rhs[i] - a[i] * dp[i - 1]) / denom;
    }
    x[N - 1] = dp[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
    return x;
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(N + 4 * bg.edges().size());
  for (std::size_t i = 0; i < N; ++i) triplets.emplace_back(i, i, diag[i]);
  for (const Edge& e : bg.edges()) {
    const double v = coef * e.conductance;
    triplets.emplace_back(e.a, e.a, v);
    triplets.emplace_back(e.b, e.b, v);
    triplets.emplace_back(e.a, e.b, -v);
    triplets.emplace_back(e.b, e.a, -v);
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw std::runtime_error("semi-implicit solve: factorization failed");
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(N));
  Eigen::VectorXd x = solver.solve(b);
  if (solver.info() != Eigen::Success) throw std::runtime_error("semi-implicit solve: back substitution failed");
  return {x.data(), x.data() + N};
}

[[noreturn]] void blow_down(double dt, std::size_t node, double value) {
  std::ostringstream os;
  os << "conformal factor became nonpositive (w = " << value << " at node " << node << ") after a step with dt = "
     << dt << "; reduce dt or use the adaptive policy";
  throw BlowDownError(os.str());
}

}  // namespace

ConformalState step(const Background& bg, const ConformalState& state, double dt, const FlowConfig& config,
                    double* volume_raw) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const Exponents& e = state.exponents();
  const std::size_t N = bg.size();
  const Field& w = state.w();
  const Field& R = state.R();
  const double r = state.r();
  Field next(N);

  if (config.stepper == Stepper::ExplicitEuler) {
    const double kappa = 0.25 * (bg.n() + bg.m() - 2.0);
    for (std::size_t i = 0; i < N; ++i) next[i] = w[i] - dt * kappa * (R[i] - r) * w[i];
  } else {
    // N w^{N-1} (w_new - w)/dt = ((n+m+2)/4)(alpha Δ w_new - R_bg w + r w^N), multiplied by μ.
    const double kappa = 0.25 * (bg.n() + bg.m() + 2.0);
    const auto mu = bg.mu();
    const Field& R0 = bg.R_bg();
    const Field& wN = state.w_pow_crit();
    std::vector<double> diag(N), rhs(N);
    for (std::size_t i = 0; i < N; ++i) {
      diag[i] = mu[i] * e.p_crit * wN[i] / w[i];
      rhs[i] = diag[i] * w[i] + dt * kappa * mu[i] * (-R0[i] * w[i] + r * wN[i]);
    }
    const std::vector<double> x = solve_shifted_stiffness(bg, diag, dt * kappa * e.alpha, rhs);
    for (std::size_t i = 0; i < N; ++i) next[i] = x[i];
  }

  for (std::size_t i = 0; i < N; ++i)
    if (!(next[i] >= kMinConformalFactor) || !std::isfinite(next[i])) blow_down(dt, i, next[i]);

  ConformalState out(bg, std::move(next));
  if (volume_raw) *volume_raw = out.volume();
  if (config.renormalize) {
    const double scale = std::pow(out.volume(), -1.0 / e.p_vol);
    Field scaled = out.w();
    for (double& v : scaled) v *= scale;
    out.set_w(std::move(scaled));
  }
  return out;
}

double steady_residual(const Background& bg, const ConformalState& state) {
  const Exponents& e = state.exponents();
  const Field& w = state.w();
  const Field lap = weighted_laplacian(bg, w);
  const Field& R0 = bg.R_bg();
  double res = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    res = std::max(res, std::abs(e.alpha * lap[i] - R0[i] * w[i] + state.r() * state.w_pow_crit()[i]));
  return res / w.max_abs();
}

double sigma_from_initial(const Field& R0) {
  double s = 1.0;
  for (double v : R0) s = std::max(s, 1.0 - v);
  return s;
}

double lyapunov_lp(const Background& bg, const ConformalState& state, double p, double sigma) {
  const Field& R = state.R();
  const Field& w = state.w();
  const auto mu = bg.mu();
  std::vector<double> terms(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double base = R[i] + sigma;
    if (!(base > 0.0))
      throw std::domain_error("lyapunov_lp: R + sigma <= 0 at node " + std::to_string(i) +
                              " (maximum principle violated)");
    terms[i] = mu[i] * state.w_pow_crit()[i] * w[i] * std::pow(base, p - 1.0);
  }
  return pairwise_sum(terms);
}

IdentityRecord monitor_identities(const Background& bg, const ConformalState& prev, const ConformalState& next,
                                  double dt, const InitialData& initial) {
  IdentityRecord rec{};
  const std::size_t N = bg.size();
  Field mid(N);
  for (std::size_t i = 0; i < N; ++i) mid[i] = 0.5 * (prev.w()[i] + next.w()[i]);
  const ConformalState midpoint(bg, std::move(mid));
  const auto mu = bg.mu();
  std::vector<double> terms(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double d = midpoint.r() - midpoint.R()[i];
    terms[i] = mu[i] * midpoint.w_pow_crit()[i] * midpoint.w()[i] * d * d;
  }
  rec.dissipation = 0.5 * (bg.n() + bg.m() - 2.0) * pairwise_sum(terms) / midpoint.volume();
  rec.dr_dt = (next.r() - prev.r()) / dt;
  rec.dr_dt_residual = std::abs(rec.dr_dt + rec.dissipation);
  rec.min_R_margin = next.R().min() - std::min(initial.min_R0, 0.0);
  const Field phi_prev = phi_from_w(bg, prev.w());
  const Field phi_next = phi_from_w(bg, next.w());
  double dphi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N; ++i) dphi = std::min(dphi, (phi_next[i] - phi_prev[i]) / dt);
  rec.dphi_dt_margin = dphi - 0.5 * bg.m() * (initial.min_R0 - initial.r0);
  return rec;
}

std::vector<std::pair<double, double>> harnack_ratios(const FlowTrace& trace, double p_crit) {
  std::vector<std::pair<double, double>> out;
  if (trace.rows.empty()) return out;
  const double min0 = trace.rows.front().min_w;
  const double max0 = trace.rows.front().max_w;
  out.reserve(trace.rows.size());
  for (const TraceRow& row : trace.rows)
    out.emplace_back(std::pow(row.min_w / min0, p_crit), std::pow(row.max_w / max0, p_crit));
  return out;
}

BarrierRecord negative_case_barriers(const FlowTrace& trace, const Background& bg, double slack) {
  BarrierRecord rec;
  if (trace.rows.empty()) return rec;
  const Exponents e = Exponents::make(bg.n(), bg.m());
  const double q = e.p_crit - 1.0;
  rec.min_w_over_run = trace.rows.front().min_w;
  for (const TraceRow& row : trace.rows) rec.min_w_over_run = std::min(rec.min_w_over_run, row.min_w);
  rec.lower_barrier_holds = rec.min_w_over_run > 0.0;

  std::size_t t0 = trace.rows.size();
  for (std::size_t k = 0; k < trace.rows.size(); ++k)
    if (trace.rows[k].r < 0.0) {
      t0 = k;
      break;
    }
  if (t0 == trace.rows.size()) return rec;  // crossing not reached: upper barrier is vacuous
  rec.crossing_reached = true;
  rec.crossing_time = trace.rows[t0].t;
  const double rt0 = std::abs(trace.rows[t0].r);
  rec.upper_bound =
      (1.0 + slack) * std::max(std::pow(trace.rows[t0].max_w, q), bg.R_bg().max_abs() / rt0);
  for (std::size_t k = t0; k < trace.rows.size(); ++k)
    rec.worst_upper_ratio = std::max(rec.worst_upper_ratio, std::pow(trace.rows[k].max_w, q) / rec.upper_bound);
  rec.upper_barrier_holds = rec.worst_upper_ratio <= 1.0;
  return rec;
}

namespace {

TraceRow make_row(const Background& bg, const ConformalState& state, double t, double volume_raw, double p,
                  double sigma, double min_w0, double max_w0, const ConformalState* prev, double dt) {
  const Exponents& e = state.exponents();
  TraceRow row;
  row.t = t;
  row.r = state.r();
  row.volume_raw = volume_raw;
  row.min_R = state.R().min();
  row.max_R = state.R().max();
  row.min_w = state.w().min();
  row.max_w = state.w().max();
  row.sup_dev = state.sup_deviation();
  row.energy = energy(bg, state.w());
  row.lambda_p = lyapunov_lp(bg, state, p, sigma);
  row.harnack_ratio_min = std::pow(row.min_w / min_w0, e.p_crit);
  row.harnack_ratio_max = std::pow(row.max_w / max_w0, e.p_crit);
  if (prev) {
    const Field a = phi_from_w(bg, prev->w());
    const Field b = phi_from_w(bg, state.w());
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::min(m, (b[i] - a[i]) / dt);
    row.dphi_dt_min = m;
  } else {
    // ∂φ/∂t = (m/2)(R - r) at the initial state.
    row.dphi_dt_min = 0.5 * bg.m() * (row.min_R - row.r);
  }
  return row;
}

bool is_converged(const ConformalState& state, const Background& bg, const FlowConfig& config, double* residual) {
  const double dev = state.sup_deviation();
  if (!(dev < config.tol_conv * (1.0 + std::abs(state.r())))) return false;
  *residual = steady_residual(bg, state);
  return *residual <= config.tol_residual;
}

}  // namespace

std::pair<FlowResult, FlowTrace> run(const Background& bg, const Field& w0, const FlowConfig& config,
                                     const StepObserver& observer) {
  const auto wall_start = std::chrono::steady_clock::now();
  config.validate(bg.n(), bg.m());
  require_same_size(w0, bg.size(), "run");
  require_positive(w0, "run");

  ConformalState state(bg, normalize_volume(bg, project_neumann(bg, w0)));
  const Exponents& e = state.exponents();
  const double p = config.lyapunov_exponent(bg.n(), bg.m());
  const double sigma = config.sigma.value_or(sigma_from_initial(state.R()));
  const double min_w0 = state.w().min();
  const double max_w0 = state.w().max();

  FlowResult result;
  result.sigma = sigma;
  result.p_lyapunov = p;
  result.case_label = classify_sign(bg).label;
  FlowAudit& audit = result.audit;
  audit.r0 = state.r();
  audit.min_R0 = state.R().min();
  audit.min_w = min_w0;
  audit.max_volume_deviation = config.renormalize ? std::abs(state.volume() - 1.0) : 0.0;

  FlowTrace trace;
  trace.rows.push_back(make_row(bg, state, 0.0, state.volume(), p, sigma, min_w0, max_w0, nullptr, 0.0));

  double t = 0.0;
  long k = 0;
  double residual = 0.0;
  bool converged = is_converged(state, bg, config, &residual);
  bool last_row_written = true;
  const double mp_floor = std::min(audit.min_R0, 0.0);
  const double mp_scale = 1.0 + std::abs(audit.min_R0);
  audit.min_max_principle_margin = (state.R().min() - mp_floor) / mp_scale;

  while (!converged && k < config.max_steps) {
    const double dt = choose_dt(bg, state, config);
    const bool monitor_next = (k + 1) % config.monitor_stride == 0;
    std::optional<ConformalState> before;
    if (observer || monitor_next) before.emplace(state);
    const double r_prev = state.r();
    const double v_prev = state.volume();
    double volume_raw = 0.0;
    state = step(bg, state, dt, config, &volume_raw);
    t += dt;
    ++k;

    // Per-step audits.
    audit.max_abs_dt = std::max(audit.max_abs_dt, dt);
    audit.max_r_increase = std::max(audit.max_r_increase, (state.r() - r_prev) / (1.0 + std::abs(r_prev)));
    audit.min_max_principle_margin =
        std::min(audit.min_max_principle_margin, (state.R().min() - mp_floor) / mp_scale);
    audit.max_volume_step_drift = std::max(audit.max_volume_step_drift, std::abs(volume_raw - v_prev));
    if (config.renormalize)
      audit.max_volume_deviation = std::max(audit.max_volume_deviation, std::abs(state.volume() - 1.0));
    const double wmin = state.w().min();
    const double wmax = state.w().max();
    audit.min_w = std::min(audit.min_w, wmin);
    audit.min_harnack_gap = std::min(audit.min_harnack_gap, std::pow(wmin / min_w0, e.p_crit) -
                                                                std::pow(wmax / max_w0, e.p_crit));
    const double wpow = std::pow(wmax, e.p_crit - 1.0);
    if (!audit.crossed_zero && r_prev >= 0.0 && state.r() < 0.0) {
      audit.crossed_zero = true;
      audit.crossing_step = k;
      audit.crossing_time = t;
      audit.r_at_crossing = state.r();
      audit.w_max_pow_at_crossing = wpow;
    }
    if (audit.crossed_zero) audit.max_w_pow_after_crossing = std::max(audit.max_w_pow_after_crossing, wpow);

    if (observer) observer(StepEvent{k, t, dt, volume_raw, *before, state});
    last_row_written = false;
    if (monitor_next) {
      trace.rows.push_back(make_row(bg, state, t, volume_raw, p, sigma, min_w0, max_w0, &*before, dt));
      last_row_written = true;
    }
    converged = is_converged(state, bg, config, &residual);
  }
  if (!last_row_written)
    trace.rows.push_back(make_row(bg, state, t, state.volume(), p, sigma, min_w0, max_w0, nullptr, 0.0));

  result.converged = converged;
  result.steps_taken = k;
  result.final_time = t;
  result.r_inf_estimate = state.r();
  result.steady_residual = steady_residual(bg, state);
  result.final_sup_dev = state.sup_deviation();
  result.w_final = state.w();
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return {std::move(result), std::move(trace)};
}

}  // namespace wyflow
