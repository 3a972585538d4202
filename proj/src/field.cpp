#include "wyflow/field.hpp"

#include <cmath>
#include <string>

namespace wyflow {

void GridSpec::validate() const {
  const int dim = dimension();
  for (int a = 0; a < dim; ++a) {
    if (counts[a] < 16) throw std::invalid_argument("grid needs at least 16 nodes per axis");
    if (!(hi[a] > lo[a])) throw std::invalid_argument("grid extent must be a nonempty interval");
  }
  if (dim == 1 && counts[1] != 1) throw std::invalid_argument("1-d grid must have counts[1] == 1");
  const std::size_t n = node_count();
  if (omega.size() != n || tags.size() != n) throw std::invalid_argument("grid omega/tags size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(omega[i] >= 0.0) || !std::isfinite(omega[i])) throw std::invalid_argument("omega must be finite and >= 0");
    if (tags[i] != NodeTag::SymmetryAxis && omega[i] <= 0.0)
      throw std::invalid_argument("omega must be positive away from the symmetry axis");
  }
}

double Field::min() const {
  double m = values_.empty() ? 0.0 : values_[0];
  for (double v : values_) m = std::min(m, v);
  return m;
}

double Field::max() const {
  double m = values_.empty() ? 0.0 : values_[0];
  for (double v : values_) m = std::max(m, v);
  return m;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

double pairwise_sum(std::span<const double> terms) {
  constexpr std::size_t kBlock = 16;
  if (terms.size() <= kBlock) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

void require_same_size(const Field& a, std::size_t n, const char* what) {
  if (a.size() != n)
    throw std::invalid_argument(std::string(what) + ": field has " + std::to_string(a.size()) +
                                " values, grid has " + std::to_string(n) + " nodes");
}

}  // namespace wyflow
