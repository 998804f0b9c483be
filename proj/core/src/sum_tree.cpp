#include "cier/sum_tree.hpp"

#include "cier/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace cier::replay {

SumTree::SumTree(std::size_t min_leaves)
    : leaves_(std::bit_ceil(std::max<std::size_t>(1, min_leaves))), nodes_(2 * leaves_, 0.0) {}

void SumTree::update(std::size_t leaf, double priority) {
  if (leaf >= leaves_) fail(Errc::InvalidParams, "leaf " + std::to_string(leaf) + " out of range");
  if (!(priority >= 0.0) || !std::isfinite(priority)) {
    fail(Errc::InvalidParams, "priority must be finite and non-negative");
  }
  std::size_t i = leaves_ + leaf;
  nodes_[i] = priority;
  for (i /= 2; i >= 1; i /= 2) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

void SumTree::rebuild(std::span<const double> priorities) {
  if (priorities.size() > leaves_) fail(Errc::InvalidParams, "more priorities than leaves");
  for (std::size_t k = 0; k < leaves_; ++k) {
    const double p = k < priorities.size() ? priorities[k] : 0.0;
    if (!(p >= 0.0) || !std::isfinite(p)) fail(Errc::InvalidParams, "priority must be finite and non-negative");
    nodes_[leaves_ + k] = p;
  }
  for (std::size_t i = leaves_ - 1; i >= 1; --i) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

std::size_t SumTree::find(double mass) const {
  mass = std::clamp(mass, 0.0, total());
  std::size_t i = 1;
  while (i < leaves_) {
    const double left = nodes_[2 * i];
    const double right = nodes_[2 * i + 1];
    if (mass < left || right <= 0.0) {
      i = 2 * i;
    } else {
      mass -= left;
      i = 2 * i + 1;
    }
  }
  return i - leaves_;
}

double SumTree::max_internal_error() const {
  double worst = 0.0;
  for (std::size_t i = 1; i < leaves_; ++i) {
    worst = std::max(worst, std::abs(nodes_[i] - (nodes_[2 * i] + nodes_[2 * i + 1])));
  }
  return worst;
}

}  // namespace cier::replay
