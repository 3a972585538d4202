#include "wyflow/background.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wyflow {

namespace {

constexpr double kPi = std::numbers::pi;

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 8> kGaussNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                            0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                              0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};

double one(double) { return 1.0; }
double zero(double) { return 0.0; }
double sin_warp(double s) { return std::sin(s); }
double cos_warp(double s) { return std::cos(s); }
double sinh_warp(double s) { return std::sinh(s); }
double cosh_warp(double s) { return std::cosh(s); }

template <class F>
double gauss_integral(F&& f, double a, double b) {
  if (b <= a) return 0.0;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t k = 0; k < kGaussNodes.size(); ++k) s += kGaussWeights[k] * f(mid + half * kGaussNodes[k]);
  return s * half;
}

// ∫ over [a, b] split at c, so that each half-cell is integrated smoothly.
template <class F>
double cell_integral(F&& f, double a, double c, double b) {
  return gauss_integral(f, a, c) + gauss_integral(f, c, b);
}

double unit_sphere_area(int n) {
  // |S^{n-1}| = 2 π^{n/2} / Γ(n/2)
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

bool is_radial(Family f) { return f == Family::SphericalCap || f == Family::HyperbolicBall; }

double extent(Family f, const FamilyParams& p) {
  switch (f) {
    case Family::FlatInterval: return p.length;
    case Family::FlatRectangle: return p.lx;
    case Family::SphericalCap: return p.theta0;
    case Family::HyperbolicBall: return p.rho0;
  }
  return 0.0;
}

}  // namespace

Family parse_family(std::string_view id) {
  if (id == "flat_interval") return Family::FlatInterval;
  if (id == "flat_rectangle") return Family::FlatRectangle;
  if (id == "spherical_cap") return Family::SphericalCap;
  if (id == "hyperbolic_ball") return Family::HyperbolicBall;
  throw std::invalid_argument("unknown background family '" + std::string(id) + "'");
}

std::string_view family_id(Family family) {
  switch (family) {
    case Family::FlatInterval: return "flat_interval";
    case Family::FlatRectangle: return "flat_rectangle";
    case Family::SphericalCap: return "spherical_cap";
    case Family::HyperbolicBall: return "hyperbolic_ball";
  }
  return "unknown";
}

FamilyParams FamilyParams::from_map(const std::map<std::string, double>& values) {
  FamilyParams p;
  for (const auto& [key, v] : values) {
    if (key == "n") {
      if (v != std::floor(v)) throw std::invalid_argument("parameter n must be an integer");
      p.n = static_cast<int>(v);
    } else if (key == "m") p.m = v;
    else if (key == "length") p.length = v;
    else if (key == "lx") p.lx = v;
    else if (key == "ly") p.ly = v;
    else if (key == "theta0") p.theta0 = v;
    else if (key == "rho0") p.rho0 = v;
    else if (key == "phi_amp") p.phi_amp = v;
    else if (key == "phi_freq") p.phi_freq = v;
    else if (key == "phi_freq_y") p.phi_freq_y = v;
    else if (key == "phi_shift") p.phi_shift = v;
    else if (key == "phi_quad") p.phi_quad = v;
    else throw std::invalid_argument("unknown background parameter '" + key + "'");
  }
  return p;
}

std::map<std::string, double> FamilyParams::to_map() const {
  std::map<std::string, double> out{{"n", static_cast<double>(n)}, {"m", m},
                                    {"length", length},            {"lx", lx},
                                    {"ly", ly},                    {"theta0", theta0},
                                    {"rho0", rho0},                {"phi_amp", phi_amp},
                                    {"phi_freq", phi_freq},        {"phi_freq_y", phi_freq_y},
                                    {"phi_shift", phi_shift}};
  if (phi_quad) out["phi_quad"] = *phi_quad;
  return out;
}

PhiSample Background::phi_at(double x, double y) const {
  const FamilyParams& p = params_;
  PhiSample s;
  if (family_ == Family::FlatRectangle) {
    const double kx = p.phi_freq * kPi / p.lx;
    const double ky = p.phi_freq_y * kPi / p.ly;
    const double cx = std::cos(kx * x), sx = std::sin(kx * x);
    const double cy = std::cos(ky * y), sy = std::sin(ky * y);
    s.value = p.phi_shift + p.phi_amp * cx * cy;
    s.dx = -p.phi_amp * kx * sx * cy;
    s.dy = -p.phi_amp * ky * cx * sy;
    s.dxx = -p.phi_amp * kx * kx * cx * cy;
    s.dyy = -p.phi_amp * ky * ky * cx * cy;
    return s;
  }
  const double L = extent(family_, p);
  const double k = p.phi_freq * kPi / L;
  s.value = p.phi_shift + p.phi_amp * std::cos(k * x) + phi_quad_ * x * x;
  s.dx = -p.phi_amp * k * std::sin(k * x) + 2.0 * phi_quad_ * x;
  s.dxx = -p.phi_amp * k * k * std::cos(k * x) + 2.0 * phi_quad_;
  return s;
}

double Background::density_at(double x, double y) const {
  const double weight = std::exp(-phi_at(x, y).value);
  if (!is_radial(family_)) return weight;
  return metric_.sphere_area * std::pow(metric_.warp(x), params_.n - 1) * weight;
}

Background build_background(Family family, const FamilyParams& params, std::size_t nodes_per_axis) {
  if (params.n < 3) throw std::invalid_argument("dimension n must be at least 3");
  if (!(params.m >= 0.0) || !std::isfinite(params.m)) throw std::invalid_argument("m must be a finite real >= 0");
  if (nodes_per_axis < 16) throw std::invalid_argument("grid needs at least 16 nodes per axis");

  Background bg;
  bg.family_ = family;
  bg.params_ = params;
  const int n = params.n;
  MetricData& metric = bg.metric_;
  metric.warp = one;
  metric.warp_derivative = zero;

  switch (family) {
    case Family::FlatInterval:
      if (!(params.length > 0.0)) throw std::invalid_argument("length must be positive");
      break;
    case Family::FlatRectangle:
      if (!(params.lx > 0.0 && params.ly > 0.0)) throw std::invalid_argument("lx and ly must be positive");
      break;
    case Family::SphericalCap:
      if (!(params.theta0 > 0.0 && params.theta0 < kPi))
        throw std::invalid_argument("theta0 must lie in (0, pi)");
      metric.warp = sin_warp;
      metric.warp_derivative = cos_warp;
      metric.scalar_curvature = n * (n - 1.0);
      metric.boundary_mean_curvature = (n - 1.0) * std::cos(params.theta0) / std::sin(params.theta0);
      metric.sphere_area = unit_sphere_area(n);
      break;
    case Family::HyperbolicBall:
      if (!(params.rho0 > 0.0)) throw std::invalid_argument("rho0 must be positive");
      metric.warp = sinh_warp;
      metric.warp_derivative = cosh_warp;
      metric.scalar_curvature = -n * (n - 1.0);
      metric.boundary_mean_curvature = (n - 1.0) / std::tanh(params.rho0);
      metric.sphere_area = unit_sphere_area(n);
      break;
  }

  // φ0 ≡ 0 is mandatory for m = 0; the quadratic term defaults to the compatible value.
  const double L = extent(family, params);
  if (params.m == 0.0) {
    if (params.phi_amp != 0.0 || params.phi_shift != 0.0 || params.phi_quad.value_or(0.0) != 0.0)
      throw std::invalid_argument("m = 0 requires phi0 identically zero");
    bg.phi_quad_ = 0.0;
  } else if (params.phi_quad) {
    bg.phi_quad_ = *params.phi_quad;
  } else {
    bg.phi_quad_ = is_radial(family) ? -metric.boundary_mean_curvature / (2.0 * L) : 0.0;
  }
  if (family == Family::FlatRectangle && params.phi_quad && *params.phi_quad != 0.0)
    throw std::invalid_argument("phi_quad is not defined for flat_rectangle");

  GridSpec& grid = bg.grid_;
  const bool two_d = family == Family::FlatRectangle;
  grid.kind = two_d ? GridKind::FlatRectangle : GridKind::Weighted1d;
  grid.counts = {nodes_per_axis, two_d ? nodes_per_axis : 1};
  grid.lo = {0.0, 0.0};
  grid.hi = {two_d ? params.lx : L, two_d ? params.ly : 0.0};
  const std::size_t N = grid.node_count();
  grid.omega.assign(N, 1.0);
  grid.tags.assign(N, NodeTag::Interior);
  const std::size_t nx = grid.counts[0];
  const std::size_t ny = grid.counts[1];
  if (two_d) {
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i)
        if (i == 0 || j == 0 || i + 1 == nx || j + 1 == ny) grid.tags[grid.index(i, j)] = NodeTag::TrueBoundary;
  } else {
    for (std::size_t i = 0; i < N; ++i) grid.omega[i] = std::pow(metric.warp(grid.coordinate(i, 0)), n - 1);
    grid.tags[N - 1] = NodeTag::TrueBoundary;
    if (is_radial(family)) {
      grid.omega[0] = 0.0;
      grid.tags[0] = NodeTag::SymmetryAxis;
    } else {
      grid.tags[0] = NodeTag::TrueBoundary;
    }
  }
  grid.validate();

  // Nodal φ0 and R^m_{φ0} from the closed forms.
  bg.phi0_ = Field(N);
  bg.R_bg_ = Field(N);
  const double m = params.m;
  for (std::size_t i = 0; i < N; ++i) {
    const double x = grid.coordinate(i, 0);
    const double y = grid.coordinate(i, 1);
    const PhiSample phi = bg.phi_at(x, y);
    bg.phi0_[i] = phi.value;
    double lap = phi.dxx + phi.dyy;
    if (is_radial(family)) {
      lap = (grid.tags[i] == NodeTag::SymmetryAxis)
                ? n * phi.dxx
                : phi.dxx + (n - 1.0) * metric.warp_derivative(x) / metric.warp(x) * phi.dx;
    }
    const double grad2 = phi.dx * phi.dx + phi.dy * phi.dy;
    bg.R_bg_[i] = metric.scalar_curvature + (m > 0.0 ? 2.0 * lap - (m + 1.0) / m * grad2 : 0.0);
  }

  // Dual-cell quadrature and face conductances.
  bg.mu_.assign(N, 0.0);
  const double hx = grid.spacing(0);
  if (!two_d) {
    auto density = [&bg](double s) { return bg.density_at(s); };
    for (std::size_t i = 0; i < N; ++i) {
      const double x = grid.coordinate(i, 0);
      const double a = std::max(grid.lo[0], x - 0.5 * hx);
      const double b = std::min(grid.hi[0], x + 0.5 * hx);
      bg.mu_[i] = cell_integral(density, a, x, b);
    }
    bg.edges_.reserve(N - 1);
    for (std::size_t i = 0; i + 1 < N; ++i) {
      const double face = grid.coordinate(i, 0) + 0.5 * hx;
      bg.edges_.push_back({i, i + 1, bg.density_at(face) / hx});
    }
  } else {
    const double hy = grid.spacing(1);
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = grid.coordinate(grid.index(0, j), 1);
      const double ya = std::max(grid.lo[1], y - 0.5 * hy);
      const double yb = std::min(grid.hi[1], y + 0.5 * hy);
      for (std::size_t i = 0; i < nx; ++i) {
        const double x = grid.coordinate(i, 0);
        const double xa = std::max(grid.lo[0], x - 0.5 * hx);
        const double xb = std::min(grid.hi[0], x + 0.5 * hx);
        auto row = [&](double yy) {
          return cell_integral([&](double xx) { return bg.density_at(xx, yy); }, xa, x, xb);
        };
        bg.mu_[grid.index(i, j)] = cell_integral(row, ya, y, yb);
      }
    }
    auto transverse = [](std::size_t k, std::size_t count, double h) {
      return (k == 0 || k + 1 == count) ? 0.5 * h : h;
    };
    bg.edges_.reserve(2 * N);
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = grid.lo[1] + hy * static_cast<double>(j);
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        const double face = grid.lo[0] + hx * (static_cast<double>(i) + 0.5);
        bg.edges_.push_back({grid.index(i, j), grid.index(i + 1, j),
                             bg.density_at(face, y) * transverse(j, ny, hy) / hx});
      }
    }
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const double face = grid.lo[1] + hy * (static_cast<double>(j) + 0.5);
      for (std::size_t i = 0; i < nx; ++i) {
        const double x = grid.lo[0] + hx * static_cast<double>(i);
        bg.edges_.push_back({grid.index(i, j), grid.index(i, j + 1),
                             bg.density_at(x, face) * transverse(i, nx, hx) / hy});
      }
    }
  }

  // Boundary samples: node, outward normal, and e^{-φ0} dA_{g0} weight.
  if (!two_d) {
    if (!is_radial(family)) bg.boundary_.push_back({0, 0, -1, std::exp(-bg.phi0_[0])});
    const double area = is_radial(family) ? metric.sphere_area * grid.omega[N - 1] : 1.0;
    bg.boundary_.push_back({N - 1, 0, +1, area * std::exp(-bg.phi0_[N - 1])});
  } else {
    const double hy = grid.spacing(1);
    auto along = [](std::size_t k, std::size_t count, double h) {
      return (k == 0 || k + 1 == count) ? 0.5 * h : h;
    };
    for (std::size_t j = 0; j < ny; ++j) {
      const std::size_t left = grid.index(0, j), right = grid.index(nx - 1, j);
      bg.boundary_.push_back({left, 0, -1, std::exp(-bg.phi0_[left]) * along(j, ny, hy)});
      bg.boundary_.push_back({right, 0, +1, std::exp(-bg.phi0_[right]) * along(j, ny, hy)});
    }
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t bottom = grid.index(i, 0), top = grid.index(i, ny - 1);
      bg.boundary_.push_back({bottom, 1, -1, std::exp(-bg.phi0_[bottom]) * along(i, nx, hx)});
      bg.boundary_.push_back({top, 1, +1, std::exp(-bg.phi0_[top]) * along(i, nx, hx)});
    }
  }

  // H^m_{φ0} = H_{g0} + ∂φ0/∂ν, evaluated in closed form.
  bg.H_bg_.reserve(bg.boundary_.size());
  for (const BoundaryPoint& b : bg.boundary_) {
    const PhiSample phi = bg.phi_at(grid.coordinate(b.node, 0), grid.coordinate(b.node, 1));
    const double dphi = b.sign * (b.axis == 0 ? phi.dx : phi.dy);
    const double H = (is_radial(family) ? metric.boundary_mean_curvature : 0.0) + dphi;
    if (!(std::abs(H) <= kBoundaryCompatibilityTol))
      throw std::invalid_argument("phi0 violates boundary compatibility: H^m_phi0 = " + std::to_string(H) +
                                  " at boundary node " + std::to_string(b.node));
    bg.H_bg_.push_back(H);
  }
  return bg;
}

Background build_background(std::string_view family, const std::map<std::string, double>& params,
                            std::size_t nodes_per_axis) {
  return build_background(parse_family(family), FamilyParams::from_map(params), nodes_per_axis);
}

void apply_weighted_laplacian(const Background& bg, std::span<const double> u, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (const Edge& e : bg.edges()) {
    const double flux = e.conductance * (u[e.b] - u[e.a]);
    out[e.a] += flux;
    out[e.b] -= flux;
  }
  const auto mu = bg.mu();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= mu[i];
}

Field weighted_laplacian(const Background& bg, const Field& u) {
  require_same_size(u, bg.size(), "weighted_laplacian");
  if (!u.all_finite()) throw std::invalid_argument("weighted_laplacian: non-finite input");
  Field out(u.size());
  apply_weighted_laplacian(bg, u.view(), out.view());
  return out;
}

Field background_weighted_scalar_curvature(const Background& bg) { return bg.R_bg(); }

std::vector<double> background_weighted_mean_curvature(const Background& bg) {
  return {bg.H_bg().begin(), bg.H_bg().end()};
}

double integrate(const Background& bg, const Field& u) {
  require_same_size(u, bg.size(), "integrate");
  std::vector<double> terms(u.size());
  const auto mu = bg.mu();
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = mu[i] * u[i];
  return pairwise_sum(terms);
}

double integrate_boundary(const Background& bg, std::span<const double> boundary_values) {
  const auto points = bg.boundary();
  if (boundary_values.size() != points.size())
    throw std::invalid_argument("integrate_boundary: expected one value per boundary point");
  std::vector<double> terms(points.size());
  for (std::size_t k = 0; k < terms.size(); ++k) terms[k] = points[k].weight * boundary_values[k];
  return pairwise_sum(terms);
}

std::vector<double> normal_derivative(const Background& bg, const Field& u) {
  require_same_size(u, bg.size(), "normal_derivative");
  const GridSpec& g = bg.grid();
  std::vector<double> out;
  out.reserve(bg.boundary().size());
  for (const BoundaryPoint& b : bg.boundary()) {
    const std::size_t stride = b.axis == 0 ? 1 : g.counts[0];
    const double h = g.spacing(b.axis);
    const std::size_t k0 = b.node;
    // Step inward: toward lower indices on the hi side, higher on the lo side.
    const std::size_t k1 = b.sign > 0 ? k0 - stride : k0 + stride;
    const std::size_t k2 = b.sign > 0 ? k0 - 2 * stride : k0 + 2 * stride;
    out.push_back((3.0 * u[k0] - 4.0 * u[k1] + u[k2]) / (2.0 * h));
  }
  return out;
}

}  // namespace wyflow
