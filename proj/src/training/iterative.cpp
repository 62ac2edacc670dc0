#include "eqlab/training/iterative.hpp"

#include <cmath>

#include "eqlab/core/error.hpp"

namespace eqlab {

Predictor model_predictor(const Architecture& arch, Vector theta, DecisionMode mode) {
  return Predictor([arch, theta = std::move(theta)](const Matrix& x) { return forward_batch(arch, theta, x); },
                   mode);
}

DecisionMode mode_for(Loss loss) { return loss == Loss::Logistic ? DecisionMode::Sign : DecisionMode::Raw; }

TrainResult train_from(const Architecture& arch, Vector theta0, const UpdateRule& rule,
                       const LabeledSet& data, Loss loss, bool trace) {
  if (data.empty()) throw PreconditionError("run_iterative requires a nonempty dataset");
  if (data.dim() != input_dim(arch)) throw DimensionError("dataset dimension does not match the model input");
  Optimizer opt(rule, arch);
  TrainResult out;
  out.theta0 = theta0;
  Vector theta = std::move(theta0);
  for (int t = 0; t < rule.steps; ++t) {
    if (trace) out.trace.snapshots.push_back(theta);
    const double value = opt.step(theta, data, loss);
    if (!std::isfinite(value)) throw DivergenceError(t, "non-finite training loss");
    out.trace.losses.push_back(value);
  }
  const double last = loss_value(arch, theta, data, loss);
  if (!std::isfinite(last) || !theta.allFinite()) throw DivergenceError(rule.steps, "non-finite training loss");
  out.trace.losses.push_back(last);
  if (trace) out.trace.snapshots.push_back(theta);
  out.max_condition = opt.max_condition();
  out.predictor = model_predictor(arch, theta, mode_for(loss));
  out.theta = std::move(theta);
  return out;
}

TrainResult run_iterative(const Architecture& arch, const InitSpec& init, const UpdateRule& rule,
                          const LabeledSet& data, RngStream& rng, Loss loss, bool trace) {
  return train_from(arch, sample_init(arch, init, rng), rule, data, loss, trace);
}

MonotoneGdResult run_gd_monotone(const Architecture& arch, const Vector& theta0, UpdateRule rule,
                                 const LabeledSet& data, Loss loss, int max_halvings) {
  rule.kind = UpdateRule::Kind::GD;
  for (int h = 0; h <= max_halvings; ++h) {
    try {
      TrainResult r = train_from(arch, theta0, rule, data, loss);
      bool monotone = true;
      for (std::size_t t = 1; t < r.trace.losses.size(); ++t)
        monotone &= r.trace.losses[t] <= r.trace.losses[t - 1];
      if (monotone) return {std::move(r), rule.eta, h};
    } catch (const DivergenceError&) {
    }
    rule.eta *= 0.5;
  }
  throw DivergenceError(rule.steps, "no step size produced a monotone loss after halving");
}

}  // namespace eqlab
