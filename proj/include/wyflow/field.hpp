#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace wyflow {

enum class GridKind { Weighted1d, FlatRectangle };

enum class NodeTag : std::uint8_t { Interior, TrueBoundary, SymmetryAxis };

/// Uniform tensor grid. One-dimensional grids keep counts[1] == 1.
/// Nodes are stored x-fastest: index = i + counts[0] * j.
struct GridSpec {
  GridKind kind = GridKind::Weighted1d;
  std::array<std::size_t, 2> counts{0, 1};
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 0.0};
  /// Transverse volume-element factor from symmetric reduction (1 for flat grids).
  std::vector<double> omega;
  std::vector<NodeTag> tags;

  [[nodiscard]] std::size_t node_count() const { return counts[0] * counts[1]; }
  [[nodiscard]] int dimension() const { return kind == GridKind::FlatRectangle ? 2 : 1; }
  [[nodiscard]] double spacing(int axis) const {
    return (hi[axis] - lo[axis]) / static_cast<double>(counts[axis] - 1);
  }
  [[nodiscard]] double min_spacing() const {
    return dimension() == 1 ? spacing(0) : std::min(spacing(0), spacing(1));
  }
  [[nodiscard]] double coordinate(std::size_t index, int axis) const {
    if (axis >= dimension()) return lo[axis];
    const std::size_t k = axis == 0 ? index % counts[0] : index / counts[0];
    return lo[axis] + spacing(axis) * static_cast<double>(k);
  }
  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j = 0) const { return i + counts[0] * j; }

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Real-valued function sampled at grid nodes.
class Field {
 public:
  Field() = default;
  explicit Field(std::size_t n, double value = 0.0) : values_(n, value) {}
  explicit Field(std::vector<double> values) : values_(std::move(values)) {}

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] std::span<const double> view() const { return values_; }
  [[nodiscard]] std::span<double> view() { return values_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  [[nodiscard]] auto begin() const { return values_.begin(); }
  [[nodiscard]] auto end() const { return values_.end(); }

  [[nodiscard]] double min() const;
  [[nodiscard]] double max() const;
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] bool all_finite() const;

 private:
  std::vector<double> values_;
};

/// Deterministic pairwise summation; result is independent of thread count.
double pairwise_sum(std::span<const double> terms);

void require_same_size(const Field& a, std::size_t n, const char* what);

}  // namespace wyflow
