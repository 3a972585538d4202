#include "wyflow/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wyflow/conformal.hpp"

namespace wyflow {

LinearizedOperator assemble_linearized(const Background& bg, const Field& w_inf) {
  require_same_size(w_inf, bg.size(), "assemble_linearized");
  require_positive(w_inf, "assemble_linearized");
  const Exponents e = Exponents::make(bg.n(), bg.m());
  const std::size_t N = bg.size();
  const auto mu = bg.mu();
  const Field& R0 = bg.R_bg();

  // Row i of Δ_{φ0}: Σ_j (c_ij/μ_i)(u_j - u_i). Each row is scaled back by μ_i.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(N);
  for (const Edge& ed : bg.edges()) {
    rows[ed.a].emplace_back(ed.b, ed.conductance / mu[ed.a]);
    rows[ed.b].emplace_back(ed.a, ed.conductance / mu[ed.b]);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(N + 4 * bg.edges().size());
  for (std::size_t i = 0; i < N; ++i) {
    double diag = R0[i];
    for (const auto& [j, coef] : rows[i]) {
      diag += e.alpha * coef;
      triplets.emplace_back(i, j, -mu[i] * e.alpha * coef);
    }
    triplets.emplace_back(i, i, mu[i] * diag);
  }
  LinearizedOperator op;
  op.stiffness.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  op.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  op.rho = Field(N);
  op.mass.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    op.rho[i] = std::pow(w_inf[i], e.p_metric);
    op.mass[i] = mu[i] * op.rho[i];
  }
  op.banded_1d = bg.grid().dimension() == 1;
  return op;
}

double symmetry_residual(const LinearizedOperator& op) {
  const Eigen::SparseMatrix<double> transposed = op.stiffness.transpose();
  const Eigen::SparseMatrix<double> diff = op.stiffness - transposed;
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it) num = std::max(num, std::abs(it.value()));
  for (int k = 0; k < op.stiffness.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.stiffness, k); it; ++it)
      den = std::max(den, std::abs(it.value()));
  return den > 0.0 ? num / den : 0.0;
}

namespace {

// Largest-magnitude entry positive; ties resolved toward the lowest index.
void fix_sign(Field& psi) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < psi.size(); ++i)
    if (std::abs(psi[i]) > std::abs(psi[arg]) * (1.0 + 1e-12)) arg = i;
  if (psi[arg] < 0.0)
    for (double& v : psi) v = -v;
}

double sym_entry(const Eigen::SparseMatrix<double>& K, Eigen::Index i, Eigen::Index j) {
  return 0.5 * (K.coeff(i, j) + K.coeff(j, i));
}

}  // namespace

Spectrum eigensolve(const LinearizedOperator& op, std::size_t k) {
  const std::size_t N = op.mass.size();
  if (k < 1 || k > N)
    throw std::invalid_argument("eigensolve: requested " + std::to_string(k) + " pairs from a problem of size " +
                                std::to_string(N));
  std::vector<double> inv_sqrt(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (!(op.mass[i] > 0.0)) throw std::runtime_error("eigensolve: mass matrix is not positive definite");
    inv_sqrt[i] = 1.0 / std::sqrt(op.mass[i]);
  }

  const lapack_int n = static_cast<lapack_int>(N);
  const lapack_int kk = static_cast<lapack_int>(k);
  lapack_int found = 0;
  std::vector<double> lambdas(N);
  std::vector<double> z(N * k);
  std::vector<lapack_int> isuppz(2 * N);
  lapack_int info = 0;
  if (op.banded_1d) {
    // T = M^{-1/2} K M^{-1/2} is tridiagonal.
    std::vector<double> d(N), sub(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      d[i] = op.stiffness.coeff(ii, ii) * inv_sqrt[i] * inv_sqrt[i];
      if (i + 1 < N) sub[i] = sym_entry(op.stiffness, ii, ii + 1) * inv_sqrt[i] * inv_sqrt[i + 1];
    }
    info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), sub.data(), 0.0, 0.0, 1, kk, 0.0, &found,
                          lambdas.data(), z.data(), n, isuppz.data());
  } else {
    std::vector<double> a(N * N, 0.0);
    for (int c = 0; c < op.stiffness.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(op.stiffness, c); it; ++it) {
        const auto i = static_cast<std::size_t>(it.row());
        const auto j = static_cast<std::size_t>(it.col());
        a[i + N * j] += 0.5 * it.value() * inv_sqrt[i] * inv_sqrt[j];
        a[j + N * i] += 0.5 * it.value() * inv_sqrt[i] * inv_sqrt[j];
      }
    info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, kk, 0.0, &found,
                          lambdas.data(), z.data(), n, isuppz.data());
  }
  if (info != 0 || found != kk)
    throw std::runtime_error("eigensolve: LAPACK returned info = " + std::to_string(info) + " with " +
                             std::to_string(found) + " of " + std::to_string(k) + " pairs");

  Spectrum spec;
  spec.rho = op.rho;
  spec.pairs.resize(k);
  spec.residuals.resize(k);
  Eigen::VectorXd psi_vec(n);
  for (std::size_t a = 0; a < k; ++a) {
    Field psi(N);
    for (std::size_t i = 0; i < N; ++i) psi[i] = z[i + N * a] * inv_sqrt[i];
    fix_sign(psi);
    for (std::size_t i = 0; i < N; ++i) psi_vec[static_cast<Eigen::Index>(i)] = psi[i];
    Eigen::VectorXd res = op.stiffness * psi_vec;
    double norm = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      res[static_cast<Eigen::Index>(i)] -= lambdas[a] * op.mass[i] * psi[i];
      norm += psi[i] * psi[i];
    }
    spec.residuals[a] = res.norm() / std::sqrt(norm);
    spec.pairs[a] = EigenPair{lambdas[a], std::move(psi)};
  }
  return spec;
}

std::vector<std::vector<double>> rho_gram(const Background& bg, const Spectrum& spectrum) {
  const std::size_t k = spectrum.pairs.size();
  const auto mu = bg.mu();
  std::vector<std::vector<double>> G(k, std::vector<double>(k, 0.0));
  std::vector<double> terms(bg.size());
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b) {
      const Field& pa = spectrum.pairs[a].psi;
      const Field& pb = spectrum.pairs[b].psi;
      for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = mu[i] * spectrum.rho[i] * pa[i] * pb[i];
      G[a][b] = G[b][a] = pairwise_sum(terms);
    }
  return G;
}

Classification classify_sign(const Background& bg) {
  const Exponents e = Exponents::make(bg.n(), bg.m());
  const LinearizedOperator op = assemble_linearized(bg, Field(bg.size(), 1.0));
  const Spectrum spec = eigensolve(op, std::min<std::size_t>(2, bg.size()));
  // The assembled operator is alpha·L; report eigenvalues of L.
  Classification c;
  c.lambda0 = spec.pairs[0].lambda / e.alpha;
  c.lambda1 = spec.pairs.size() > 1 ? spec.pairs[1].lambda / e.alpha : c.lambda0;
  const double band = 1e-8 * (1.0 + std::abs(c.lambda1));
  if (std::abs(c.lambda0) <= band)
    c.label = CaseLabel::Zero;
  else
    c.label = c.lambda0 > 0.0 ? CaseLabel::Positive : CaseLabel::Negative;
  return c;
}

LowModeSet low_mode_set(const Spectrum& spectrum, double r_inf, double p_crit) {
  LowModeSet set;
  set.threshold = p_crit * r_inf;
  if (spectrum.pairs.empty()) throw std::invalid_argument("low_mode_set: empty spectrum");
  for (std::size_t a = 0; a < spectrum.pairs.size(); ++a)
    if (spectrum.pairs[a].lambda <= set.threshold) set.indices.push_back(a);
  if (set.indices.size() == spectrum.pairs.size())
    throw std::invalid_argument("low_mode_set: every computed eigenvalue is below the threshold; request more pairs");
  return set;
}

Field project_low_modes(const Background& bg, const Spectrum& spectrum, const LowModeSet& modes, const Field& f) {
  require_same_size(f, bg.size(), "project_low_modes");
  const auto mu = bg.mu();
  Field out = f;
  std::vector<double> terms(f.size());
  for (std::size_t a : modes.indices) {
    if (a >= spectrum.pairs.size()) throw std::invalid_argument("project_low_modes: index outside the spectrum");
    const Field& psi = spectrum.pairs[a].psi;
    for (std::size_t i = 0; i < f.size(); ++i) terms[i] = mu[i] * psi[i] * f[i];
    const double coef = pairwise_sum(terms);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] -= coef * spectrum.rho[i] * psi[i];
  }
  return out;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo, std::size_t hi) {
  const double n = static_cast<double>(hi - lo);
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double d = y[i] - (f.intercept + f.slope * x[i]);
    ss += d * d;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace

DecayFit fit_decay_exponent(const FlowTrace& trace, double r_inf, double tol_conv) {
  std::vector<double> lt, lr;
  for (const TraceRow& row : trace.rows) {
    const double gap = row.r - r_inf;
    if (row.t > 0.0 && gap > 10.0 * tol_conv) {
      lt.push_back(std::log(row.t));
      lr.push_back(std::log(gap));
    }
  }
  if (lt.size() < 50)
    throw std::invalid_argument("fit_decay_exponent: only " + std::to_string(lt.size()) +
                                " usable rows (need at least 50)");
  DecayFit fit;
  fit.rows_used = lt.size();
  const LineFit all = least_squares(lt, lr, 0, lt.size());
  fit.beta = -all.slope;
  fit.gamma = (1.0 - fit.beta) / (1.0 + fit.beta);
  fit.fit_residual = all.rms;
  const std::size_t half = lt.size() / 2;
  fit.beta_early = -least_squares(lt, lr, 0, half).slope;
  fit.beta_late = -least_squares(lt, lr, half, lt.size()).slope;
  fit.super_polynomial = fit.beta_late > 1.2 * std::max(fit.beta_early, 0.0) + 1e-3;
  return fit;
}

double rayleigh_lower_bound(const Background& bg, const Field& w) {
  require_same_size(w, bg.size(), "rayleigh_lower_bound");
  const Exponents e = Exponents::make(bg.n(), bg.m());
  double best = energy(bg, w);
  best = std::min(best, energy(bg, Field(bg.size(), 1.0)));
  const LinearizedOperator op = assemble_linearized(bg, Field(bg.size(), 1.0));
  Field ground = eigensolve(op, 1).pairs[0].psi;
  const double lo = ground.min();
  const double shift = (lo < 0.0 ? -lo : 0.0) + 1e-3 * ground.max_abs();
  for (double& v : ground) v += shift;
  if (ground.min() > 0.0) best = std::min(best, energy(bg, ground));
  return best / e.c_R;
}

}  // namespace wyflow
