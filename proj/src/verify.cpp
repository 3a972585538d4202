#include "wyflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wyflow/conformal.hpp"
#include "wyflow/spectral.hpp"

namespace wyflow {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

CheckOutcome check_direct_curvature(const ScenarioConfig& c) {
  CheckOutcome out;
  out.name = "direct_curvature";
  if (c.family != "flat_interval") {
    out.skipped = out.passed = true;
    out.detail = "skipped: defined on flat_interval only";
    return out;
  }
  const auto report = oracle::refinement_study(
      {128, 256, 512}, [&](std::size_t nodes) { return build_scenario_background(c, nodes); },
      [](const Background& bg) {
        const double L = bg.grid().hi[0] - bg.grid().lo[0];
        const Field w = sample(bg, [L](double x, double) { return 1.0 + 0.1 * std::cos(std::numbers::pi * x / L); });
        const Field a = oracle::direct_curvature(bg, w);
        const Field b = curvature_from_w(bg, w);
        double e = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
        return e;
      });
  out.passed = report.order >= c.verify.order_min;
  out.detail = "order " + fmt(report.order) + " (min " + fmt(c.verify.order_min) + ")";
  out.reports.emplace_back("refinement_direct_curvature", report);
  return out;
}

CheckOutcome check_ibp(const ScenarioConfig& c) {
  CheckOutcome out;
  out.name = "ibp";
  const bool two_d = c.family == "flat_rectangle";
  const std::vector<std::size_t> meshes = two_d ? std::vector<std::size_t>{33, 65, 129}
                                                : std::vector<std::size_t>{128, 256, 512};
  out.passed = true;
  double worst = std::numeric_limits<double>::infinity();
  const Background probe = build_scenario_background(c, meshes.front());
  for (int s = 0; s < c.verify.seeds; ++s) {
    const auto f = oracle::TrigField::random(probe, c.seed + 2 * static_cast<std::uint64_t>(s));
    const auto u = oracle::TrigField::random(probe, c.seed + 2 * static_cast<std::uint64_t>(s) + 1);
    const auto report = oracle::refinement_study(
        meshes, [&](std::size_t nodes) { return build_scenario_background(c, nodes); },
        [&](const Background& bg) { return oracle::ibp_pair_residual(bg, f.on(bg), u.on(bg)); });
    worst = std::min(worst, report.order);
    out.passed = out.passed && report.order >= c.verify.order_min;
    out.reports.emplace_back("refinement_ibp_seed" + std::to_string(c.seed + 2 * static_cast<std::uint64_t>(s)),
                             report);
  }
  out.detail = std::to_string(c.verify.seeds) + " seed pairs, worst order " + fmt(worst) + " (min " +
               fmt(c.verify.order_min) + ")";
  return out;
}

CheckOutcome check_dense_spectrum(const ScenarioConfig& c) {
  CheckOutcome out;
  out.name = "dense_spectrum";
  const std::size_t nodes = c.family == "flat_rectangle" ? 22 : std::min<std::size_t>(c.mesh, 512);
  const Background bg = build_scenario_background(c, nodes);
  Field w(bg.size(), 1.0);
  if (c.initial.kind != "file") w = initial_field(bg, c);
  w = normalize_volume(bg, w);
  const std::size_t k = std::min<std::size_t>(6, bg.size());
  const LinearizedOperator op = assemble_linearized(bg, w);
  const Spectrum primary = eigensolve(op, k);
  const Spectrum dense = oracle::dense_reference_spectrum(bg, op.rho, k);
  double worst = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    const double ref = dense.pairs[a].lambda;
    worst = std::max(worst, std::abs(primary.pairs[a].lambda - ref) / std::max(std::abs(ref), 1.0));
  }
  out.passed = worst <= c.verify.eig_rel;
  out.detail = "max relative eigenvalue gap " + fmt(worst) + " over " + std::to_string(k) + " pairs (max " +
               fmt(c.verify.eig_rel) + ")";
  return out;
}

CheckOutcome check_dr_dt(const ScenarioConfig& c) {
  CheckOutcome out;
  out.name = "dr_dt";
  const Background bg = build_scenario_background(c);
  const Field w0 = normalize_volume(bg, initial_field(bg, c));
  double dt = c.flow.dt;
  if (c.flow.dt_policy == DtPolicy::Adaptive) dt = choose_dt(bg, ConformalState(bg, w0), c.flow);
  const auto x = oracle::dr_dt_crosscheck(bg, w0, c.flow, dt, 5);
  if (!x.defined) {
    out.passed = true;
    out.detail = "ratio undefined: dr/dt vanishes (steady state)";
    return out;
  }
  out.passed = x.ratio >= c.verify.ratio_lo && x.ratio <= c.verify.ratio_hi;
  out.detail = "coarse/fine residual ratio " + fmt(x.ratio) + " (range [" + fmt(c.verify.ratio_lo) + ", " +
               fmt(c.verify.ratio_hi) + "])";
  return out;
}

}  // namespace

std::vector<CheckOutcome> run_verify(const ScenarioConfig& config) {
  if (config.verify.suites.empty()) throw ConfigError("verify: the suite list is empty");
  std::vector<CheckOutcome> out;
  for (const std::string& s : config.verify.suites) {
    if (s == "direct_curvature") out.push_back(check_direct_curvature(config));
    else if (s == "ibp") out.push_back(check_ibp(config));
    else if (s == "dense_spectrum") out.push_back(check_dense_spectrum(config));
    else if (s == "dr_dt") out.push_back(check_dr_dt(config));
    else throw ConfigError("verify: unknown suite '" + s + "'");
  }
  return out;
}

}  // namespace wyflow
