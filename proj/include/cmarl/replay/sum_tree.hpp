#pragma once

#include <cstddef>
#include <vector>

namespace cmarl::replay {

/// Binary tree over `capacity` leaves where every internal node stores the
/// sum of its two children. Leaves are padded to a power of two.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  void set(std::size_t leaf, double value);
  double get(std::size_t leaf) const { return nodes_[base_ + leaf]; }
  double total() const { return nodes_[1]; }

  /// Leaf whose cumulative range [prefix_before, prefix_before + value) holds `mass`.
  std::size_t find(double mass) const;

  /// True when every internal node equals the sum of its children exactly.
  bool consistent() const;
  double leaf_sum() const;

 private:
  std::size_t capacity_;
  std::size_t base_;
  std::vector<double> nodes_;  // 1-based heap layout
};

}  // namespace cmarl::replay
