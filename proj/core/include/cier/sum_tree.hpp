#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cier::replay {

/// Complete binary tree over a power-of-two number of leaves; every internal
/// node holds the sum of its children, so proportional sampling and point
/// updates are O(log n).
class SumTree {
 public:
  /// Rounds `min_leaves` up to a power of two (at least 1).
  explicit SumTree(std::size_t min_leaves);

  std::size_t capacity() const noexcept { return leaves_; }
  double total() const noexcept { return nodes_[1]; }
  double get(std::size_t leaf) const { return nodes_[leaves_ + leaf]; }

  /// Sets one leaf and recomputes its ancestors from their children.
  void update(std::size_t leaf, double priority);

  /// Replaces every leaf (missing tail entries become 0) and rebuilds all
  /// internal nodes bottom-up.
  void rebuild(std::span<const double> priorities);

  /// Leaf i such that the prefix sum of leaves before i is <= mass and the
  /// prefix through i exceeds it. `mass` is clamped into [0, total). Leaves
  /// with zero priority are never returned while total() > 0.
  std::size_t find(double mass) const;

  /// Largest |node - (left + right)| over internal nodes.
  double max_internal_error() const;

 private:
  std::size_t leaves_;
  std::vector<double> nodes_;  // 1-based heap layout; leaves at [leaves_, 2 leaves_)
};

}  // namespace cier::replay
