#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "eqlab/core/dataset.hpp"
#include "eqlab/core/group.hpp"

namespace eqlab {

enum class LabelKind { Sign, Real };

struct Task {
  std::string name;
  int d = 0;
  LabelKind label_kind = LabelKind::Sign;
  std::function<Vector(RngStream&)> sampler;
  std::function<double(const Vector&)> labeler;
  // Finite-support tasks list their atoms as columns; sampling is uniform with replacement.
  std::optional<Matrix> support;

  bool finite() const { return support.has_value(); }
  Vector draw(RngStream& rng) const;
  LabeledSet sample(int n, RngStream& rng) const;
  Vector label_all(const Matrix& points) const;
  // Support points with their labels (finite tasks only).
  LabeledSet enumerate() const;
};

Task onehot_task(int d);
Task quadratic_split_task(int d2);
Task alpha_quadratic_task(const Vector& alpha);
// Inputs (u; v) ∈ R^{2d}, label sign(uᵀ U v).
Task hU_task(const Matrix& u);
Task quadratic_regression_task(const Matrix& m);
// Cyclic textures s_i = e_i + e_{i+2} (label +1) and t_i = e_i + e_{i+1} (label -1).
Task texture_task(int d);

// Orthogonal g_U on R^{2d} with sign(uᵀUv) = h*(g_U(u; v)) for the
// quadratic-split labeler h*.
GroupElement embed_subclass(const Matrix& u);

// Samples g⁻¹(x) for x from the base task and labels x by base(g x).
Task rotate_task(const Task& base, const GroupElement& g);

// CIFAR-10 binary batch (records of 1 label byte + R, G, B 32×32 planes).
// Labels are +1 iff ‖R‖ > ‖G‖ (ties -1); pixels scaled to [0,1] and centered
// by the dataset's mean pixel value.
LabeledSet cifar_channel_norm(const std::string& path);
LabeledSet cifar_channel_norm_bytes(const std::string& bytes);

// CSV with columns x_0 … x_{d-1}, y.
void write_labeled_csv(std::ostream& out, const LabeledSet& s);
LabeledSet read_labeled_csv(std::istream& in);

}  // namespace eqlab
