#include <doctest.h>

#include "helpers.hpp"
#include "wyflow/conformal.hpp"
#include "wyflow/oracle.hpp"
#include "wyflow/spectral.hpp"

using namespace wyflow;
using testing::pi;

TEST_SUITE("spectral") {
  TEST_CASE("flat Neumann spectrum is alpha (pi a)^2") {
    const Background bg = testing::flat(3, 1.0, 1024);
    const Exponents e = Exponents::make(3, 1.0);
    const LinearizedOperator op = assemble_linearized(bg, Field(bg.size(), 1.0));
    CHECK(op.banded_1d);
    CHECK(symmetry_residual(op) <= 1e-12);
    const Spectrum spec = eigensolve(op, 6);
    CHECK(std::abs(spec.pairs[0].lambda) <= 1e-8 * (1.0 + std::abs(spec.pairs[1].lambda)));
    for (int a = 1; a < 6; ++a) {
      const double exact = e.alpha * pi * pi * a * a;
      CHECK(std::abs(spec.pairs[a].lambda - exact) <= 1e-3 * exact);
    }
    for (std::size_t a = 1; a < 6; ++a) CHECK(spec.pairs[a].lambda >= spec.pairs[a - 1].lambda);
  }

  TEST_CASE("hemisphere with constant factor: lambda0 = n(n-1) with constant mode") {
    const Background bg = testing::cap(3, 1.0, 256);
    const Spectrum spec = eigensolve(assemble_linearized(bg, Field(bg.size(), 1.0)), 3);
    CHECK(spec.pairs[0].lambda == doctest::Approx(6.0).epsilon(1e-9));
    const Field& psi = spec.pairs[0].psi;
    CHECK(psi.max() - psi.min() <= 1e-8 * psi.max_abs());
  }

  TEST_CASE("rho-orthonormality and residuals at a nonconstant weight") {
    const Background bg = testing::cap(3, 1.0, 300, 0.1);
    const Field w = normalize_volume(bg, sample(bg, [](double s, double) { return 1.0 + 0.2 * std::cos(2 * s); }));
    const LinearizedOperator op = assemble_linearized(bg, w);
    CHECK(symmetry_residual(op) <= 1e-12);
    const Spectrum spec = eigensolve(op, 6);
    const auto G = rho_gram(bg, spec);
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b) CHECK(std::abs(G[a][b] - (a == b ? 1.0 : 0.0)) <= 1e-10);
    for (std::size_t a = 0; a < 6; ++a) {
      const double scale = std::max(1.0, std::abs(spec.pairs[a].lambda)) * 1e-8;
      CHECK(spec.residuals[a] <= scale);
    }
  }

  TEST_CASE("rectangle uses the dense symmetric path") {
    FamilyParams p;
    p.lx = 1.0;
    p.ly = 2.0;
    const Background bg = build_background(Family::FlatRectangle, p, 20);
    const LinearizedOperator op = assemble_linearized(bg, Field(bg.size(), 1.0));
    CHECK_FALSE(op.banded_1d);
    const Spectrum spec = eigensolve(op, 4);
    const Spectrum ref = oracle::dense_reference_spectrum(bg, op.rho, 4);
    for (std::size_t a = 0; a < 4; ++a)
      CHECK(std::abs(spec.pairs[a].lambda - ref.pairs[a].lambda) <= 1e-8 * std::max(1.0, ref.pairs[a].lambda));
  }

  TEST_CASE("eigensolve argument errors") {
    const Background bg = testing::flat(3, 1.0, 32);
    const LinearizedOperator op = assemble_linearized(bg, Field(bg.size(), 1.0));
    CHECK_THROWS_AS(eigensolve(op, 0), std::invalid_argument);
    CHECK_THROWS_AS(eigensolve(op, 33), std::invalid_argument);
    CHECK_NOTHROW(eigensolve(op, 32));
  }

  TEST_CASE("sign classification") {
    CHECK(classify_sign(testing::flat(3, 1.0, 128)).label == CaseLabel::Zero);
    const Classification c = classify_sign(testing::cap(3, 1.0, 128));
    CHECK(c.label == CaseLabel::Positive);
    CHECK(c.lambda0 == doctest::Approx(1.0).epsilon(1e-8));  // c_R·6 with c_R = 1/6
    CHECK(classify_sign(testing::flat(3, 2.0, 256, 1.0)).label == CaseLabel::Negative);
  }

  TEST_CASE("classification ignores constant shifts of the potential") {
    for (double amp : {0.0, 0.5, 1.5}) {
      FamilyParams p;
      p.m = 2.0;
      p.phi_amp = amp;
      const CaseLabel base = classify_sign(build_background(Family::FlatInterval, p, 128)).label;
      p.phi_shift = 3.7;
      CHECK(classify_sign(build_background(Family::FlatInterval, p, 128)).label == base);
    }
  }

  TEST_CASE("low-mode projector algebra") {
    const Background bg = testing::cap(3, 1.0, 200, 0.1);
    const Field w = normalize_volume(bg, Field(bg.size(), 1.0));
    const Spectrum spec = eigensolve(assemble_linearized(bg, w), 8);
    const double r_inf = average_curvature(bg, w);
    const LowModeSet A = low_mode_set(spec, r_inf, Exponents::make(3, 1.0).p_crit);
    REQUIRE(!A.indices.empty());
    REQUIRE(A.indices.size() < spec.pairs.size());
    for (std::size_t a = 0; a < spec.pairs.size(); ++a) {
      Field f(bg.size());
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = spec.rho[i] * spec.pairs[a].psi[i];
      const Field p = project_low_modes(bg, spec, A, f);
      const bool low = std::find(A.indices.begin(), A.indices.end(), a) != A.indices.end();
      if (low) CHECK(p.max_abs() <= 1e-10 * f.max_abs());
      else CHECK(testing::max_abs_diff(p, f) <= 1e-10 * f.max_abs());
    }
    const Field g = oracle::TrigField::random(bg, 5).on(bg);
    const Field p1 = project_low_modes(bg, spec, A, g);
    const Field p2 = project_low_modes(bg, spec, A, p1);
    CHECK(testing::max_abs_diff(p1, p2) <= 1e-10 * g.max_abs());
    CHECK_THROWS_AS(low_mode_set(spec, 1e9, 3.0), std::invalid_argument);
  }

  TEST_CASE("decay fitter: synthetic power law and exponential") {
    FlowTrace power, expo;
    for (int k = 1; k <= 200; ++k) {
      const double t = 0.05 * k;
      TraceRow row;
      row.t = t;
      row.r = 2.0 + std::pow(t, -1.0 / 3.0);
      power.rows.push_back(row);
      row.r = 2.0 + std::exp(-t);
      expo.rows.push_back(row);
    }
    const DecayFit fp = fit_decay_exponent(power, 2.0, 1e-6);
    CHECK(fp.beta == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(std::abs(fp.gamma - 0.5) <= 1e-3);
    CHECK_FALSE(fp.super_polynomial);
    const DecayFit fe = fit_decay_exponent(expo, 2.0, 1e-6);
    CHECK(fe.super_polynomial);
    CHECK(fe.beta_late > fe.beta_early);
    FlowTrace short_trace;
    short_trace.rows.assign(power.rows.begin(), power.rows.begin() + 40);
    CHECK_THROWS_AS(fit_decay_exponent(short_trace, 2.0, 1e-6), std::invalid_argument);
  }

  TEST_CASE("Rayleigh lower bound") {
    const Background flat = testing::flat(3, 1.0, 128);
    CHECK(std::abs(rayleigh_lower_bound(flat, Field(flat.size(), 1.0))) <= 1e-12);
    const Background cap = testing::cap(3, 1.0, 128);
    const Field w = normalize_volume(cap, sample(cap, [](double s, double) { return 1.0 + 0.1 * std::cos(2 * s); }));
    const double bound = rayleigh_lower_bound(cap, w);
    CHECK(bound <= average_curvature(cap, w) + 1e-9);
    // Constant trial: E(1)/c_R = 6·Vol^{2/(n+m)} with Vol = π².
    CHECK(bound <= 6.0 * pi + 1e-9);
  }
}
