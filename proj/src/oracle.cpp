#include "wyflow/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "wyflow/conformal.hpp"

namespace wyflow::oracle {

RefinementReport fit_order(std::vector<double> h, std::vector<double> errors) {
  if (h.size() != errors.size() || h.size() < 3)
    throw std::invalid_argument("fit_order: need at least three (h, error) pairs");
  double sx = 0.0, sy = 0.0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(errors[i] > 0.0)) throw std::invalid_argument("fit_order: entries must be positive");
    sx += std::log(h[i]);
    sy += std::log(errors[i]);
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double dx = std::log(h[i]) - sx / n;
    sxx += dx * dx;
    sxy += dx * (std::log(errors[i]) - sy / n);
  }
  RefinementReport rep;
  rep.order = sxy / sxx;
  rep.h = std::move(h);
  rep.errors = std::move(errors);
  return rep;
}

namespace {

// First and second derivatives of an even-reflected nodal function on a uniform line.
struct Derivs {
  std::vector<double> d1, d2;
};

Derivs even_derivatives(const std::vector<double>& v, double h) {
  const std::size_t N = v.size();
  Derivs d{std::vector<double>(N), std::vector<double>(N)};
  for (std::size_t i = 0; i < N; ++i) {
    const double left = i == 0 ? v[1] : v[i - 1];
    const double right = i + 1 == N ? v[N - 2] : v[i + 1];
    d.d1[i] = (right - left) / (2.0 * h);
    d.d2[i] = (right - 2.0 * v[i] + left) / (h * h);
  }
  return d;
}

double one_sided_outward(double at, double next, double next2, double h) {
  return (3.0 * at - 4.0 * next + next2) / (2.0 * h);
}

// Gradient along a line: central inside, second-order one-sided at the ends.
std::vector<double> line_gradient(const std::vector<double>& v, double h) {
  const std::size_t N = v.size();
  std::vector<double> g(N);
  g[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  g[N - 1] = (3.0 * v[N - 1] - 4.0 * v[N - 2] + v[N - 3]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < N; ++i) g[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  return g;
}

double trapezoid_weight(std::size_t i, std::size_t N, double h) { return (i == 0 || i + 1 == N) ? 0.5 * h : h; }

void fix_sign(Field& psi) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < psi.size(); ++i)
    if (std::abs(psi[i]) > std::abs(psi[arg]) * (1.0 + 1e-12)) arg = i;
  if (psi[arg] < 0.0)
    for (double& v : psi) v = -v;
}

}  // namespace

Field direct_curvature(const Background& bg, const Field& w) {
  if (bg.family() != Family::FlatInterval)
    throw std::invalid_argument("direct_curvature supports flat_interval backgrounds only");
  require_same_size(w, bg.size(), "direct_curvature");
  const std::size_t N = bg.size();
  const int n = bg.n();
  const double m = bg.m();
  const double h = bg.grid().spacing(0);
  const double k = n + m;

  std::vector<double> s(N), phi(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (!(w[i] > 0.0)) throw std::domain_error("direct_curvature: w must be positive");
    s[i] = 2.0 / (k - 2.0) * std::log(w[i]);
    phi[i] = bg.phi0()[i] - m * s[i];
  }
  const Derivs ds = even_derivatives(s, h);
  const Derivs dphi = even_derivatives(phi, h);
  const double R_flat = 0.0;

  Field R(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double conf = std::exp(-2.0 * s[i]);
    const double Rg = conf * (R_flat - 2.0 * (n - 1.0) * ds.d2[i] - (n - 1.0) * (n - 2.0) * ds.d1[i] * ds.d1[i]);
    double value = Rg;
    if (m > 0.0) {
      const double lap_phi = conf * (dphi.d2[i] + (n - 2.0) * ds.d1[i] * dphi.d1[i]);
      const double grad2 = conf * dphi.d1[i] * dphi.d1[i];
      value += 2.0 * lap_phi - (m + 1.0) / m * grad2;
    }
    R[i] = value;
  }
  return R;
}

double ibp_residual(const Background& bg, const Field& f, const Field& u) {
  require_same_size(f, bg.size(), "ibp_residual");
  require_same_size(u, bg.size(), "ibp_residual");
  const GridSpec& g = bg.grid();
  const Field lap = weighted_laplacian(bg, u);
  const std::size_t nx = g.counts[0];
  const std::size_t ny = g.counts[1];
  const double hx = g.spacing(0);
  const double hy = g.dimension() == 2 ? g.spacing(1) : 1.0;

  double grad_term = 0.0, lap_term = 0.0, boundary_term = 0.0;
  if (g.dimension() == 1) {
    const std::vector<double> fd = line_gradient(f.values(), hx);
    const std::vector<double> ud = line_gradient(u.values(), hx);
    for (std::size_t i = 0; i < nx; ++i) {
      const double wt = trapezoid_weight(i, nx, hx) * bg.density_at(g.coordinate(i, 0));
      grad_term += wt * fd[i] * ud[i];
      lap_term += wt * f[i] * lap[i];
    }
    const auto& v = u.values();
    const double right = one_sided_outward(v[nx - 1], v[nx - 2], v[nx - 3], hx);
    boundary_term += f[nx - 1] * right * bg.density_at(g.hi[0]);
    if (g.tags[0] == NodeTag::TrueBoundary) {
      const double left = one_sided_outward(v[0], v[1], v[2], hx);
      boundary_term += f[0] * left * bg.density_at(g.lo[0]);
    }
  } else {
    auto row = [&](const Field& a, std::size_t j) {
      std::vector<double> out(nx);
      for (std::size_t i = 0; i < nx; ++i) out[i] = a[g.index(i, j)];
      return out;
    };
    auto col = [&](const Field& a, std::size_t i) {
      std::vector<double> out(ny);
      for (std::size_t j = 0; j < ny; ++j) out[j] = a[g.index(i, j)];
      return out;
    };
    std::vector<double> fx(bg.size()), ux(bg.size()), fy(bg.size()), uy(bg.size());
    for (std::size_t j = 0; j < ny; ++j) {
      const auto a = line_gradient(row(f, j), hx), b = line_gradient(row(u, j), hx);
      for (std::size_t i = 0; i < nx; ++i) {
        fx[g.index(i, j)] = a[i];
        ux[g.index(i, j)] = b[i];
      }
    }
    for (std::size_t i = 0; i < nx; ++i) {
      const auto a = line_gradient(col(f, i), hy), b = line_gradient(col(u, i), hy);
      for (std::size_t j = 0; j < ny; ++j) {
        fy[g.index(i, j)] = a[j];
        uy[g.index(i, j)] = b[j];
      }
    }
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t k = g.index(i, j);
        const double wt = trapezoid_weight(i, nx, hx) * trapezoid_weight(j, ny, hy) *
                          bg.density_at(g.coordinate(k, 0), g.coordinate(k, 1));
        grad_term += wt * (fx[k] * ux[k] + fy[k] * uy[k]);
        lap_term += wt * f[k] * lap[k];
      }
    for (std::size_t j = 0; j < ny; ++j) {
      const auto r = row(u, j);
      const double y = g.coordinate(g.index(0, j), 1);
      const double wt = trapezoid_weight(j, ny, hy);
      boundary_term += wt * f[g.index(0, j)] * one_sided_outward(r[0], r[1], r[2], hx) * bg.density_at(g.lo[0], y);
      boundary_term += wt * f[g.index(nx - 1, j)] * one_sided_outward(r[nx - 1], r[nx - 2], r[nx - 3], hx) *
                       bg.density_at(g.hi[0], y);
    }
    for (std::size_t i = 0; i < nx; ++i) {
      const auto c = col(u, i);
      const double x = g.coordinate(i, 0);
      const double wt = trapezoid_weight(i, nx, hx);
      boundary_term += wt * f[g.index(i, 0)] * one_sided_outward(c[0], c[1], c[2], hy) * bg.density_at(x, g.lo[1]);
      boundary_term += wt * f[g.index(i, ny - 1)] * one_sided_outward(c[ny - 1], c[ny - 2], c[ny - 3], hy) *
                       bg.density_at(x, g.hi[1]);
    }
  }
  return std::abs(grad_term + lap_term - boundary_term);
}

double ibp_pair_residual(const Background& bg, const Field& f, const Field& u) {
  return std::max({ibp_residual(bg, f, u), ibp_residual(bg, u, f), ibp_residual(bg, f, f)});
}

Spectrum dense_reference_spectrum(const Background& bg, const Field& rho, std::size_t k) {
  const std::size_t N = bg.size();
  if (N > 512) throw std::invalid_argument("dense_reference_spectrum: at most 512 nodes");
  if (k < 1 || k > N) throw std::invalid_argument("dense_reference_spectrum: k out of range");
  require_same_size(rho, N, "dense_reference_spectrum");
  const Exponents e = Exponents::make(bg.n(), bg.m());
  const auto mu = bg.mu();
  const auto Ni = static_cast<Eigen::Index>(N);
  Eigen::MatrixXd K(Ni, Ni);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(Ni, Ni);
  Field unit(N, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    unit[j] = 1.0;
    const Field col = weighted_laplacian(bg, unit);
    for (std::size_t i = 0; i < N; ++i)
      K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          mu[i] * (-e.alpha * col[i] + (i == j ? bg.R_bg()[i] : 0.0));
    unit[j] = 0.0;
    M(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = mu[j] * rho[j];
  }
  const Eigen::MatrixXd Ks = 0.5 * (K + K.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(Ks, M);
  if (solver.info() != Eigen::Success) throw std::runtime_error("dense_reference_spectrum: solver failed");

  Spectrum spec;
  spec.rho = rho;
  for (std::size_t a = 0; a < k; ++a) {
    const auto ai = static_cast<Eigen::Index>(a);
    Field psi(N);
    for (std::size_t i = 0; i < N; ++i) psi[i] = solver.eigenvectors()(static_cast<Eigen::Index>(i), ai);
    fix_sign(psi);
    Eigen::VectorXd v(Ni);
    for (std::size_t i = 0; i < N; ++i) v[static_cast<Eigen::Index>(i)] = psi[i];
    const double lambda = solver.eigenvalues()[ai];
    spec.residuals.push_back((Ks * v - lambda * (M * v)).norm() / v.norm());
    spec.pairs.push_back(EigenPair{lambda, std::move(psi)});
  }
  return spec;
}

TrigField::TrigField(std::vector<std::vector<double>> coeffs, double x0, double lx, double y0, double ly)
    : coeffs_(std::move(coeffs)), x0_(x0), lx_(lx), y0_(y0), ly_(ly) {}

TrigField TrigField::random(const Background& bg, std::uint64_t seed, int modes) {
  if (modes < 1) throw std::invalid_argument("TrigField::random: modes must be >= 1");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const GridSpec& g = bg.grid();
  const int my = g.dimension() == 2 ? modes : 1;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(modes), std::vector<double>(my));
  for (int a = 0; a < modes; ++a)
    for (int b = 0; b < my; ++b) {
      const double damp = 1.0 / ((1.0 + a + b) * (1.0 + a + b));
      c[a][b] = dist(gen) * damp;
    }
  const double ly = g.dimension() == 2 ? g.hi[1] - g.lo[1] : 1.0;
  return TrigField(std::move(c), g.lo[0], g.hi[0] - g.lo[0], g.lo[1], ly);
}

double TrigField::operator()(double x, double y) const {
  double sum = 0.0;
  for (std::size_t a = 0; a < coeffs_.size(); ++a) {
    const double cx = std::cos(static_cast<double>(a) * std::numbers::pi * (x - x0_) / lx_);
    for (std::size_t b = 0; b < coeffs_[a].size(); ++b)
      sum += coeffs_[a][b] * cx * std::cos(static_cast<double>(b) * std::numbers::pi * (y - y0_) / ly_);
  }
  return sum;
}

Field TrigField::on(const Background& bg) const {
  return sample(bg, [this](double x, double y) { return (*this)(x, y); });
}

namespace {

struct StepResidual {
  double absolute;
  double rate;
};

StepResidual identity_residual(const Background& bg, const ConformalState& a, const ConformalState& b, double dt) {
  const std::size_t N = bg.size();
  const auto mu = bg.mu();
  const double k = bg.n() + bg.m();
  const double pv = 2.0 * k / (k - 2.0);
  Field mid(N);
  for (std::size_t i = 0; i < N; ++i) mid[i] = 0.5 * (a.w()[i] + b.w()[i]);
  const Field R = curvature_from_w(bg, mid);
  double vol = 0.0, rR = 0.0;
  std::vector<double> wp(N);
  for (std::size_t i = 0; i < N; ++i) {
    wp[i] = std::pow(mid[i], pv);
    vol += mu[i] * wp[i];
    rR += mu[i] * wp[i] * R[i];
  }
  const double r = rR / vol;
  double diss = 0.0;
  for (std::size_t i = 0; i < N; ++i) diss += mu[i] * wp[i] * (r - R[i]) * (r - R[i]);
  diss *= 0.5 * (k - 2.0) / vol;
  const double rate = (b.r() - a.r()) / dt;
  return {std::abs(rate + diss), std::abs(rate)};
}

}  // namespace

DrDtCrosscheck dr_dt_crosscheck(const Background& bg, const Field& w0, FlowConfig config, double dt, int steps) {
  if (steps < 1 || !(dt > 0.0)) throw std::invalid_argument("dr_dt_crosscheck: need steps >= 1 and dt > 0");
  config.dt_policy = DtPolicy::Fixed;
  auto sweep = [&](double h, int count, double& min_rate) {
    ConformalState state(bg, normalize_volume(bg, w0));
    double total = 0.0;
    for (int s = 0; s < count; ++s) {
      ConformalState next = step(bg, state, h, config);
      const StepResidual res = identity_residual(bg, state, next, h);
      total += res.absolute / std::max(res.rate, std::numeric_limits<double>::min());
      min_rate = std::min(min_rate, res.rate);
      state = std::move(next);
    }
    return total / count;
  };
  DrDtCrosscheck out;
  double min_rate = std::numeric_limits<double>::infinity();
  out.coarse = sweep(dt, steps, min_rate);
  out.fine = sweep(0.5 * dt, 2 * steps, min_rate);
  out.defined = min_rate > 1e-10 && out.fine > 0.0;
  out.ratio = out.defined ? out.coarse / out.fine : std::numeric_limits<double>::quiet_NaN();
  return out;
}

RefinementReport refinement_study(const std::vector<std::size_t>& meshes,
                                  const std::function<Background(std::size_t)>& build,
                                  const std::function<double(const Background&)>& error) {
  std::vector<double> h, errs;
  for (std::size_t nodes : meshes) {
    const Background bg = build(nodes);
    h.push_back(bg.grid().min_spacing());
    errs.push_back(error(bg));
  }
  return fit_order(std::move(h), std::move(errs));
}

}  // namespace wyflow::oracle
