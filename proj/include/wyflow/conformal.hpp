#pragma once

#include <vector>

#include "wyflow/background.hpp"

namespace wyflow {

/// Exponents of the conformal calculus in dimension n with parameter m.
struct Exponents {
  double alpha;     // 4(n+m-1)/(n+m-2), coefficient in the curvature transformation law
  double c_R;       // (n+m-2)/(4(n+m-1)), scalar-curvature coefficient of L
  double c_H;       // (n+m-2)/(2(n+m-1)), mean-curvature coefficient of B
  double p_crit;    // N = (n+m+2)/(n+m-2)
  double p_vol;     // 2(n+m)/(n+m-2), volume exponent
  double p_metric;  // 4/(n+m-2), metric exponent
  double p_weight;  // 2m/(n+m-2), exponent of the weight density e^{-φ}

  /// Asserts the sub-criticality p_crit < (n+2)/(n-2) whenever m > 0.
  static Exponents make(int n, double m);
};

/// Floor below which a conformal factor counts as blown down.
inline constexpr double kMinConformalFactor = 1e-300;

/// Throws std::domain_error if some entry of w is below kMinConformalFactor (or not finite).
void require_positive(const Field& w, const char* what);

/// L^m_{φ0}u = -Δ_{φ0}u + c_R R^m_{φ0} u.
Field conformal_laplacian_apply(const Background& bg, const Field& u);

/// R^m_φ = alpha w^{-p_crit} L^m_{φ0} w.
Field curvature_from_w(const Background& bg, const Field& w);

/// H^m_φ at each boundary point, using the one-sided normal derivative of w.
std::vector<double> mean_curvature_from_w(const Background& bg, const Field& w);

/// ∫ w^{p_vol} e^{-φ0} dV_{g0}.
double total_volume(const Background& bg, const Field& w);

/// r = ∫ R w^{p_vol} dμ / ∫ w^{p_vol} dμ.
double average_curvature(const Background& bg, const Field& w);

/// w·s with s > 0 chosen so that total_volume == 1.
Field normalize_volume(const Background& bg, const Field& w);

/// Normalized energy. The boundary term is c_H ∮ H^m_{φ0} w² because the discrete
/// operator carries the zero Neumann data of w.
double energy(const Background& bg, const Field& w);

/// φ = φ0 - (2m/(n+m-2)) ln w, the weight potential of the conformal space.
Field phi_from_w(const Background& bg, const Field& w);

/// Conformal factor together with the quantities derived from it. Every mutation
/// recomputes R, r and the volume.
class ConformalState {
 public:
  ConformalState(const Background& bg, Field w);

  [[nodiscard]] const Field& w() const { return w_; }
  [[nodiscard]] const Field& R() const { return R_; }
  [[nodiscard]] double r() const { return r_; }
  [[nodiscard]] double volume() const { return volume_; }
  /// w^{p_crit} at every node (cached for the steppers).
  [[nodiscard]] const Field& w_pow_crit() const { return w_pow_crit_; }
  [[nodiscard]] const Exponents& exponents() const { return exponents_; }
  [[nodiscard]] double sup_deviation() const;

  void set_w(Field w);

 private:
  void refresh();

  const Background* bg_;
  Exponents exponents_;
  Field w_;
  Field R_;
  Field w_pow_crit_;
  double r_ = 0.0;
  double volume_ = 0.0;
  std::vector<double> scratch_;
};

}  // namespace wyflow
