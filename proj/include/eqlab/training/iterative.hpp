#pragma once

#include <vector>

#include "eqlab/training/init.hpp"
#include "eqlab/training/optimizer.hpp"
#include "eqlab/training/predictor.hpp"

namespace eqlab {

struct TrainTrace {
  std::vector<Vector> snapshots;  // θ_0 … θ_T when tracing is enabled
  std::vector<double> losses;     // loss at θ_0 … θ_T
};

struct TrainResult {
  Predictor predictor;
  TrainTrace trace;
  Vector theta0;
  Vector theta;
  double max_condition = 0.0;  // Newton only
};

// Wraps flat parameters into a predictor for the given architecture.
Predictor model_predictor(const Architecture& arch, Vector theta, DecisionMode mode);
DecisionMode mode_for(Loss loss);

// Runs exactly rule.steps updates starting from theta0.
TrainResult train_from(const Architecture& arch, Vector theta0, const UpdateRule& rule,
                       const LabeledSet& data, Loss loss, bool trace = false);

// Samples θ_0 from `init` using rng, then trains. Logistic loss gives a sign
// predictor, squared loss a raw one.
TrainResult run_iterative(const Architecture& arch, const InitSpec& init, const UpdateRule& rule,
                          const LabeledSet& data, RngStream& rng, Loss loss, bool trace = false);

// GD that halves eta and restarts until the training loss is non-increasing.
struct MonotoneGdResult {
  TrainResult result;
  double eta = 0.0;
  int halvings = 0;
};
MonotoneGdResult run_gd_monotone(const Architecture& arch, const Vector& theta0, UpdateRule rule,
                                 const LabeledSet& data, Loss loss, int max_halvings = 40);

}  // namespace eqlab
