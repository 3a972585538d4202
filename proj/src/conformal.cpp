#include "wyflow/conformal.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wyflow {

Exponents Exponents::make(int n, double m) {
  if (n < 3 || !(m >= 0.0)) throw std::invalid_argument("exponents need n >= 3 and m >= 0");
  const double k = n + m;
  Exponents e{};
  e.alpha = 4.0 * (k - 1.0) / (k - 2.0);
  e.c_R = (k - 2.0) / (4.0 * (k - 1.0));
  e.c_H = (k - 2.0) / (2.0 * (k - 1.0));
  e.p_crit = (k + 2.0) / (k - 2.0);
  e.p_vol = 2.0 * k / (k - 2.0);
  e.p_metric = 4.0 / (k - 2.0);
  e.p_weight = 2.0 * m / (k - 2.0);
  if (m > 0.0 && !(e.p_crit < (n + 2.0) / (n - 2.0)))
    throw std::logic_error("curvature exponent is not sub-critical");
  return e;
}

void require_positive(const Field& w, const char* what) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= kMinConformalFactor) || !std::isfinite(w[i]))
      throw std::domain_error(std::string(what) + ": conformal factor not positive at node " + std::to_string(i) +
                              " (w = " + std::to_string(w[i]) + ")");
  }
}

Field conformal_laplacian_apply(const Background& bg, const Field& u) {
  const Exponents e = Exponents::make(bg.n(), bg.m());
  Field out = weighted_laplacian(bg, u);
  const Field& R = bg.R_bg();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] + e.c_R * R[i] * u[i];
  return out;
}

Field curvature_from_w(const Background& bg, const Field& w) {
  require_same_size(w, bg.size(), "curvature_from_w");
  require_positive(w, "curvature_from_w");
  const Exponents e = Exponents::make(bg.n(), bg.m());
  Field lap = weighted_laplacian(bg, w);
  const Field& R0 = bg.R_bg();
  Field R(w.size());
  // alpha·c_R == 1, so alpha·L w = R_bg w - alpha Δw.
  for (std::size_t i = 0; i < w.size(); ++i) R[i] = (R0[i] * w[i] - e.alpha * lap[i]) / std::pow(w[i], e.p_crit);
  return R;
}

std::vector<double> mean_curvature_from_w(const Background& bg, const Field& w) {
  require_same_size(w, bg.size(), "mean_curvature_from_w");
  require_positive(w, "mean_curvature_from_w");
  const Exponents e = Exponents::make(bg.n(), bg.m());
  const double k = bg.n() + bg.m();
  const double prefactor = 2.0 * (k - 1.0) / (k - 2.0);
  const double power = k / (k - 2.0);
  std::vector<double> dn = normal_derivative(bg, w);
  const auto points = bg.boundary();
  const auto H0 = bg.H_bg();
  for (std::size_t b = 0; b < dn.size(); ++b) {
    const double wb = w[points[b].node];
    dn[b] = prefactor * std::pow(wb, -power) * (dn[b] + e.c_H * H0[b] * wb);
  }
  return dn;
}

double total_volume(const Background& bg, const Field& w) {
  require_same_size(w, bg.size(), "total_volume");
  require_positive(w, "total_volume");
  const Exponents e = Exponents::make(bg.n(), bg.m());
  Field terms(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) terms[i] = std::pow(w[i], e.p_vol);
  return integrate(bg, terms);
}

double average_curvature(const Background& bg, const Field& w) {
  const Exponents e = Exponents::make(bg.n(), bg.m());
  const Field R = curvature_from_w(bg, w);
  Field weighted(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) weighted[i] = R[i] * std::pow(w[i], e.p_vol);
  return integrate(bg, weighted) / total_volume(bg, w);
}

Field normalize_volume(const Background& bg, const Field& w) {
  const Exponents e = Exponents::make(bg.n(), bg.m());
  const double scale = std::pow(total_volume(bg, w), -1.0 / e.p_vol);
  Field out = w;
  for (double& v : out) v *= scale;
  return out;
}

double energy(const Background& bg, const Field& w) {
  require_same_size(w, bg.size(), "energy");
  require_positive(w, "energy");
  const Exponents e = Exponents::make(bg.n(), bg.m());
  const Field Lw = conformal_laplacian_apply(bg, w);
  Field interior(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) interior[i] = w[i] * Lw[i];
  const auto points = bg.boundary();
  const auto H0 = bg.H_bg();
  std::vector<double> boundary(points.size());
  for (std::size_t b = 0; b < points.size(); ++b) {
    const double wb = w[points[b].node];
    boundary[b] = e.c_H * H0[b] * wb * wb;
  }
  const double k = bg.n() + bg.m();
  const double numerator = integrate(bg, interior) + integrate_boundary(bg, boundary);
  return numerator / std::pow(total_volume(bg, w), (k - 2.0) / k);
}

Field phi_from_w(const Background& bg, const Field& w) {
  require_same_size(w, bg.size(), "phi_from_w");
  require_positive(w, "phi_from_w");
  const Exponents e = Exponents::make(bg.n(), bg.m());
  Field phi = bg.phi0();
  for (std::size_t i = 0; i < w.size(); ++i) phi[i] -= e.p_weight * std::log(w[i]);
  return phi;
}

ConformalState::ConformalState(const Background& bg, Field w)
    : bg_(&bg), exponents_(Exponents::make(bg.n(), bg.m())), w_(std::move(w)) {
  require_same_size(w_, bg.size(), "ConformalState");
  refresh();
}

void ConformalState::set_w(Field w) {
  require_same_size(w, bg_->size(), "ConformalState::set_w");
  w_ = std::move(w);
  refresh();
}

double ConformalState::sup_deviation() const {
  double s = 0.0;
  for (double v : R_) s = std::max(s, std::abs(v - r_));
  return s;
}

void ConformalState::refresh() {
  require_positive(w_, "ConformalState");
  const std::size_t N = w_.size();
  R_ = Field(N);
  w_pow_crit_ = Field(N);
  scratch_.resize(N);
  apply_weighted_laplacian(*bg_, w_.view(), scratch_);
  const Field& R0 = bg_->R_bg();
  const auto mu = bg_->mu();
  const double alpha = exponents_.alpha;
  for (std::size_t i = 0; i < N; ++i) {
    const double wN = std::pow(w_[i], exponents_.p_crit);
    w_pow_crit_[i] = wN;
    R_[i] = (R0[i] * w_[i] - alpha * scratch_[i]) / wN;
  }
  // w^{p_vol} = w^{p_crit}·w.
  for (std::size_t i = 0; i < N; ++i) scratch_[i] = mu[i] * w_pow_crit_[i] * w_[i];
  volume_ = pairwise_sum(scratch_);
  for (std::size_t i = 0; i < N; ++i) scratch_[i] *= R_[i];
  r_ = pairwise_sum(scratch_) / volume_;
}

}  // namespace wyflow
