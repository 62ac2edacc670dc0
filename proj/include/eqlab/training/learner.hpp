#pragma once

#include <functional>
#include <string>

#include "eqlab/core/dataset.hpp"
#include "eqlab/core/group.hpp"
#include "eqlab/training/predictor.hpp"

namespace eqlab {

struct Learner {
  std::string name;
  std::function<Predictor(const LabeledSet&, RngStream&)> fit;
};

struct GroupSampler {
  std::string name;
  std::function<GroupElement(int, RngStream&)> draw;

  static GroupSampler haar();
  static GroupSampler permutation();
  static GroupSampler sign_flip();
  static GroupSampler identity();
};

// Draws g once per fit, trains on g(data), and predicts x ↦ inner(g x).
Learner symmetrized(Learner inner, GroupSampler sampler);

}  // namespace eqlab
