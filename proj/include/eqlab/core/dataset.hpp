#pragma once

#include <cstdint>

#include "eqlab/core/group.hpp"
#include "eqlab/core/linalg.hpp"

namespace eqlab {

// Training or test data: one point per column of `points`.
struct LabeledSet {
  Matrix points;  // d × n
  Vector labels;  // n
  std::uint64_t seed = 0;

  LabeledSet() = default;
  LabeledSet(Matrix p, Vector y, std::uint64_t s = 0);

  int dim() const { return static_cast<int>(points.rows()); }
  int size() const { return static_cast<int>(points.cols()); }
  bool empty() const { return points.cols() == 0; }
  Vector point(int i) const { return points.col(i); }

  // g applied to every point; labels unchanged.
  LabeledSet transformed(const GroupElement& g) const;
  LabeledSet head(int n) const;
};

}  // namespace eqlab
