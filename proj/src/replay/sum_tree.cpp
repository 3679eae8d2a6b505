#include "cmarl/replay/sum_tree.hpp"

#include <bit>

#include "cmarl/core/errors.hpp"

namespace cmarl::replay {

SumTree::SumTree(std::size_t capacity)
    : capacity_(capacity), base_(std::bit_ceil(capacity < 1 ? std::size_t{1} : capacity)), nodes_(2 * base_, 0.0) {}

void SumTree::set(std::size_t leaf, double value) {
  if (leaf >= capacity_) raise(ErrorCode::BadId, "sum tree leaf out of range");
  if (!(value >= 0.0)) raise(ErrorCode::BadId, "sum tree values must be non-negative");
  std::size_t i = base_ + leaf;
  nodes_[i] = value;
  for (i /= 2; i >= 1; i /= 2) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

std::size_t SumTree::find(double mass) const {
  std::size_t i = 1;
  while (i < base_) {
    const double left = nodes_[2 * i];
    if (mass < left || nodes_[2 * i + 1] <= 0.0) {
      i = 2 * i;
    } else {
      mass -= left;
      i = 2 * i + 1;
    }
  }
  return i - base_;
}

bool SumTree::consistent() const {
  for (std::size_t i = base_ - 1; i >= 1; --i) {
    if (nodes_[i] != nodes_[2 * i] + nodes_[2 * i + 1]) return false;
  }
  return true;
}

double SumTree::leaf_sum() const {
  double s = 0;
  for (std::size_t i = 0; i < capacity_; ++i) s += nodes_[base_ + i];
  return s;
}

}  // namespace cmarl::replay
