#pragma once

#include <cmath>
#include <numbers>

#include "wyflow/background.hpp"

namespace testing {

inline constexpr double pi = std::numbers::pi;

inline wyflow::Background flat(int n, double m, std::size_t nodes, double amp = 0.0, double freq = 2.0) {
  wyflow::FamilyParams p;
  p.n = n;
  p.m = m;
  p.phi_amp = amp;
  p.phi_freq = freq;
  return wyflow::build_background(wyflow::Family::FlatInterval, p, nodes);
}

inline wyflow::Background cap(int n, double m, std::size_t nodes, double amp = 0.0, double freq = 1.0) {
  wyflow::FamilyParams p;
  p.n = n;
  p.m = m;
  p.phi_amp = amp;
  p.phi_freq = freq;
  return wyflow::build_background(wyflow::Family::SphericalCap, p, nodes);
}

inline double max_abs_diff(const wyflow::Field& a, const wyflow::Field& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

inline double observed_order(double coarse_err, double fine_err) { return std::log2(coarse_err / fine_err); }

}  // namespace testing
