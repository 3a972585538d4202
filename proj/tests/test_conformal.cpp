#include <doctest.h>

#include <limits>

#include <random>

#include "helpers.hpp"
#include "wyflow/conformal.hpp"
#include "wyflow/oracle.hpp"

using namespace wyflow;
using testing::pi;

namespace {

// Positive Neumann field 1.5 + 0.3·u with u a seeded trig sum.
Field admissible(const Background& bg, std::uint64_t seed) {
  const Field u = oracle::TrigField::random(bg, seed).on(bg);
  const double s = 0.3 / std::max(u.max_abs(), 1e-300);
  Field w(bg.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.5 + s * u[i];
  return w;
}

}  // namespace

TEST_SUITE("conformal") {
  TEST_CASE("exponents for n = 3, m = 1") {
    const Exponents e = Exponents::make(3, 1.0);
    // k = n + m = 4.
    CHECK(e.alpha == doctest::Approx(4.0 * 3.0 / 2.0));
    CHECK(e.c_R == doctest::Approx(2.0 / 12.0));
    CHECK(e.c_H == doctest::Approx(2.0 / 6.0));
    CHECK(e.p_crit == doctest::Approx(6.0 / 2.0));
    CHECK(e.p_vol == doctest::Approx(8.0 / 2.0));
    CHECK(e.p_metric == doctest::Approx(4.0 / 2.0));
    CHECK(e.p_weight == doctest::Approx(2.0 / 2.0));
    CHECK(e.alpha * e.c_R == doctest::Approx(1.0));
    for (int n : {3, 4, 7})
      for (double m : {0.5, 1.0, 3.0}) CHECK(Exponents::make(n, m).p_crit < (n + 2.0) / (n - 2.0));
    CHECK_THROWS_AS(Exponents::make(2, 1.0), std::invalid_argument);
  }

  TEST_CASE("conformal Laplacian examples") {
    const Background flat = testing::flat(3, 1.0, 256);
    CHECK(conformal_laplacian_apply(flat, Field(flat.size(), 2.0)).max_abs() == 0.0);
    const Background cap = testing::cap(3, 1.0, 256);
    const Field one = conformal_laplacian_apply(cap, Field(cap.size(), 1.0));
    for (double v : one) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    const Field u = sample(flat, [](double x, double) { return std::cos(pi * x); });
    const Field expected = sample(flat, [](double x, double) { return pi * pi * std::cos(pi * x); });
    const double h = flat.grid().spacing(0);
    CHECK(testing::max_abs_diff(conformal_laplacian_apply(flat, u), expected) <= std::pow(pi, 4) * h * h);
  }

  TEST_CASE("curvature of constant factors") {
    const Background bg = testing::cap(3, 1.0, 128, 0.1);
    const Field R1 = curvature_from_w(bg, Field(bg.size(), 1.0));
    CHECK(testing::max_abs_diff(R1, bg.R_bg()) == 0.0);
    const double c = 1.7;
    const Exponents e = Exponents::make(3, 1.0);
    const Field Rc = curvature_from_w(bg, Field(bg.size(), c));
    for (std::size_t i = 0; i < bg.size(); ++i)
      CHECK(Rc[i] == doctest::Approx(std::pow(c, -e.p_metric) * bg.R_bg()[i]).epsilon(1e-13));
  }

  TEST_CASE("curvature homogeneity on a nonconstant factor") {
    const Background bg = testing::flat(3, 2.0, 128, 0.3);
    const double h = bg.grid().spacing(0);
    const Field w = admissible(bg, 7);
    const Exponents e = Exponents::make(3, 2.0);
    const Field R = curvature_from_w(bg, w);
    for (double c : {0.5, 2.0, 10.0}) {
      Field cw = w;
      for (double& v : cw) v *= c;
      const Field Rc = curvature_from_w(bg, cw);
      for (std::size_t i = 0; i < R.size(); ++i)
        // Roundoff of alpha times a second difference, carried through the scaling.
        CHECK(std::abs(Rc[i] - std::pow(c, -e.p_metric) * R[i]) <=
              4.0 * e.alpha * std::numeric_limits<double>::epsilon() / (h * h) * std::pow(c, -e.p_metric));
    }
  }

  TEST_CASE("curvature of 1 + 0.1 cos(pi x) on the flat interval") {
    const Exponents e = Exponents::make(3, 2.0);
    double prev = 0.0;
    for (std::size_t nodes : {128, 256, 512}) {
      const Background bg = testing::flat(3, 2.0, nodes);
      const Field w = sample(bg, [](double x, double) { return 1.0 + 0.1 * std::cos(pi * x); });
      const Field expected = sample(bg, [&](double x, double) {
        return e.alpha * 0.1 * pi * pi * std::cos(pi * x) * std::pow(1.0 + 0.1 * std::cos(pi * x), -e.p_crit);
      });
      const double err = testing::max_abs_diff(curvature_from_w(bg, w), expected);
      if (prev > 0.0) CHECK(testing::observed_order(prev, err) > 1.8);
      prev = err;
    }
  }

  TEST_CASE("nonpositive factors are rejected") {
    const Background bg = testing::flat(3, 1.0, 64);
    Field w(bg.size(), 1.0);
    w[10] = 0.0;
    CHECK_THROWS_AS(curvature_from_w(bg, w), std::domain_error);
    w[10] = -1.0;
    CHECK_THROWS_AS(total_volume(bg, w), std::domain_error);
    CHECK_THROWS_AS(phi_from_w(bg, w), std::domain_error);
    CHECK_THROWS_AS(ConformalState(bg, w), std::domain_error);
  }

  TEST_CASE("mean curvature vanishes for Neumann factors") {
    const Background bg = testing::flat(3, 1.0, 256);
    for (double v : mean_curvature_from_w(bg, Field(bg.size(), 1.0))) CHECK(v == 0.0);
    const Field w = sample(bg, [](double x, double) { return 1.0 + x * x * (1.0 - x) * (1.0 - x); });
    const double h = bg.grid().spacing(0);
    // One-sided derivative error h²|w'''|/3 = 4h² at the ends, scaled by 2(k-1)/(k-2) = 3.
    for (double v : mean_curvature_from_w(bg, w)) CHECK(std::abs(v) <= 13.0 * h * h);
  }

  TEST_CASE("volume of 1 + 0.1 cos(2 pi x) against a fine quadrature") {
    const Exponents e = Exponents::make(3, 2.0);
    // Composite Simpson with 20000 panels is converged far below the O(h²) tolerance.
    const int M = 20000;
    double ref = 0.0;
    for (int i = 0; i <= M; ++i) {
      const double x = static_cast<double>(i) / M;
      const double f = std::pow(1.0 + 0.1 * std::cos(2 * pi * x), e.p_vol);
      ref += f * ((i == 0 || i == M) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    ref /= 3.0 * M;
    const Background bg = testing::flat(3, 2.0, 256);
    const Field w = sample(bg, [](double x, double) { return 1.0 + 0.1 * std::cos(2 * pi * x); });
    const double h = bg.grid().spacing(0);
    CHECK(std::abs(total_volume(bg, w) - ref) <= 10.0 * h * h);
    CHECK(total_volume(bg, Field(bg.size(), 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(total_volume(bg, Field(bg.size(), 1.3)) == doctest::Approx(std::pow(1.3, e.p_vol)).epsilon(1e-13));
  }

  TEST_CASE("volume normalization") {
    const Background bg = testing::flat(3, 1.0, 128);
    const Field two = normalize_volume(bg, Field(bg.size(), 2.0));
    for (double v : two) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> dist(0.2, 3.0);
    Field w(bg.size());
    for (double& v : w) v = dist(gen);
    const Field n = normalize_volume(bg, w);
    CHECK(std::abs(total_volume(bg, n) - 1.0) <= 1e-14);
    CHECK(std::max_element(n.begin(), n.end()) - n.begin() == std::max_element(w.begin(), w.end()) - w.begin());
    CHECK(std::min_element(n.begin(), n.end()) - n.begin() == std::min_element(w.begin(), w.end()) - w.begin());
    const Field again = normalize_volume(bg, n);
    CHECK(testing::max_abs_diff(again, n) <= 1e-15);
  }

  TEST_CASE("energy examples") {
    const Background bg = testing::flat(3, 1.0, 128);
    CHECK(energy(bg, Field(bg.size(), 1.0)) == 0.0);
    const Background cap = testing::cap(3, 1.0, 128, 0.1);
    const Field w = admissible(cap, 3);
    const double E = energy(cap, w);
    for (double c : {0.5, 2.0, 10.0}) {
      Field cw = w;
      for (double& v : cw) v *= c;
      CHECK(std::abs(energy(cap, cw) - E) <= 1e-12 * std::abs(E));
    }
  }

  TEST_CASE("energy equals c_R r for volume-normalized factors") {
    const Exponents e = Exponents::make(3, 1.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Background bg = testing::cap(3, 1.0, 256, 0.1);
      const Field w = normalize_volume(bg, admissible(bg, seed));
      CHECK(std::abs(energy(bg, w) - e.c_R * average_curvature(bg, w)) <= 1e-9);
    }
  }

  TEST_CASE("weight potential of the conformal space") {
    const Background bg = testing::flat(3, 1.0, 64, 0.2);
    CHECK(testing::max_abs_diff(phi_from_w(bg, Field(bg.size(), 1.0)), bg.phi0()) == 0.0);
    const Exponents e = Exponents::make(3, 1.0);
    const Field phi = phi_from_w(bg, Field(bg.size(), std::exp(1.0)));
    for (std::size_t i = 0; i < bg.size(); ++i) CHECK(phi[i] == doctest::Approx(bg.phi0()[i] - e.p_weight));
  }

  TEST_CASE("state caches agree with the free functions") {
    const Background bg = testing::cap(3, 1.0, 128, 0.1);
    const Field w = admissible(bg, 11);
    ConformalState s(bg, w);
    CHECK(testing::max_abs_diff(s.R(), curvature_from_w(bg, w)) <= 1e-12 * s.R().max_abs());
    CHECK(s.r() == doctest::Approx(average_curvature(bg, w)).epsilon(1e-13));
    CHECK(s.volume() == doctest::Approx(total_volume(bg, w)).epsilon(1e-13));
    s.set_w(Field(bg.size(), 1.0));
    CHECK(testing::max_abs_diff(s.R(), bg.R_bg()) == 0.0);
  }
}
