#include "eqlab/core/dataset.hpp"

#include "eqlab/core/error.hpp"

namespace eqlab {

LabeledSet::LabeledSet(Matrix p, Vector y, std::uint64_t s)
    : points(std::move(p)), labels(std::move(y)), seed(s) {
  if (points.cols() != labels.size())
    throw DimensionError("LabeledSet: " + std::to_string(points.cols()) + " points but " +
                         std::to_string(labels.size()) + " labels");
}

LabeledSet LabeledSet::transformed(const GroupElement& g) const {
  return LabeledSet(g.apply_columns(points), labels, seed);
}

LabeledSet LabeledSet::head(int n) const {
  if (n < 0 || n > size()) throw PreconditionError("LabeledSet::head: n out of range");
  return LabeledSet(points.leftCols(n), labels.head(n), seed);
}

}  // namespace eqlab
