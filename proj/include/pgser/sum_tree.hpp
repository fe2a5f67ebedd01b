#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pgser {

/// Complete binary tree of partial sums with priorities at the leaves.
/// Proportional sampling descends from the root in O(log n) and picks the
/// same leaf a linear prefix-sum scan would pick for the same draw.
class SumTree {
 public:
  /// Capacity is rounded up to the next power of two.
  explicit SumTree(std::size_t min_leaves) {
    leaves_ = 1;
    while (leaves_ < min_leaves) leaves_ <<= 1;
    nodes_.assign(2 * leaves_, 0.0);
  }

  std::size_t leaf_count() const { return leaves_; }

  double get(std::size_t leaf) const { return nodes_[check(leaf) + leaves_]; }

  double total() const { return nodes_[1]; }

  /// Sets a leaf and recomputes every partial sum on the path to the root
  /// from its children, so parent sums stay exact instead of drifting.
  void set(std::size_t leaf, double value) {
    if (!(value >= 0.0) || std::isinf(value))
      throw std::invalid_argument("SumTree::set: value must be finite and >= 0");
    std::size_t i = check(leaf) + leaves_;
    nodes_[i] = value;
    for (i >>= 1; i >= 1; i >>= 1)
      nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
  }

  /// Leaf whose cumulative-sum interval contains u, for u in [0, total()).
  std::size_t find_prefix(double u) const {
    std::size_t i = 1;
    while (i < leaves_) {
      const std::size_t left = 2 * i;
      if (u < nodes_[left]) {
        i = left;
      } else {
        u -= nodes_[left];
        i = left + 1;
      }
    }
    return i - leaves_;
  }

  /// Every internal node equals the sum of its children, within tol.
  bool check_sums(double tol = 0.0) const {
    for (std::size_t i = 1; i < leaves_; ++i)
      if (std::abs(nodes_[i] - (nodes_[2 * i] + nodes_[2 * i + 1])) > tol)
        return false;
    return true;
  }

 private:
  std::size_t check(std::size_t leaf) const {
    if (leaf >= leaves_) throw std::out_of_range("SumTree: leaf index");
    return leaf;
  }

  std::size_t leaves_ = 0;
  std::vector<double> nodes_;  // 1-based heap layout, nodes_[1] is the root
};

}  // namespace pgser
