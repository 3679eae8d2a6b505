#pragma once

#include <cstdlib>

namespace cmarl::env {

struct Cell {
  int row = 0;
  int col = 0;

  bool operator==(const Cell&) const = default;
  Cell operator+(const Cell& o) const { return {row + o.row, col + o.col}; }
};

inline int manhattan(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }
inline int chebyshev(Cell a, Cell b) {
  const int dr = std::abs(a.row - b.row);
  const int dc = std::abs(a.col - b.col);
  return dr > dc ? dr : dc;
}

inline bool in_bounds(Cell c, int rows, int cols) {
  return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols;
}

}  // namespace cmarl::env
