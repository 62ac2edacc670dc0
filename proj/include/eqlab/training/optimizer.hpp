#pragma once

#include <optional>
#include <string>

#include "eqlab/models/model.hpp"

namespace eqlab {

struct UpdateRule {
  enum class Kind { GD, Momentum, LpReg, Newton, Adam, AdaGrad };

  Kind kind = Kind::GD;
  double eta = 0.1;
  int steps = 100;
  double gamma = 0.9;    // momentum
  // Penalty lambda·Σ|θ_i|^p on the trainable block, added to every rule's
  // gradient; the lp-reg kind is plain GD on the penalized loss.
  double p = 2.0;
  double lambda = 0.0;
  double ridge = 1e-8;   // Newton shift, relative to |tr H| / dim
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Parameters outside this block are frozen (default: all trainable).
  std::optional<ParamRange> trainable;

  static UpdateRule gd(double eta, int steps);
  static UpdateRule momentum(double eta, double gamma, int steps);
  static UpdateRule lp_reg(double eta, double p, double lambda, int steps);
  static UpdateRule newton(double eta, int steps, double ridge = 1e-8);
  static UpdateRule adam(double eta, int steps);
  static UpdateRule adagrad(double eta, int steps);

  void validate() const;
};

std::string to_string(UpdateRule::Kind k);
UpdateRule::Kind parse_rule_kind(const std::string& s);
std::string describe(const UpdateRule& r);

// Gradient of Σ|w_i|^p, with sign(0) = 0 for p = 1.
Vector penalty_gradient(const Vector& w, double p);

// Stateful full-batch optimizer for one training run.
class Optimizer {
 public:
  Optimizer(UpdateRule rule, Architecture arch);

  // Applies one update in place and returns the (unregularized) loss at the
  // incoming parameters.
  double step(Vector& theta, const LabeledSet& data, Loss loss);

  int steps_taken() const { return t_; }
  // Largest Hessian condition number seen by Newton steps.
  double max_condition() const { return max_cond_; }

 private:
  Vector masked_gradient(const Vector& theta, const LabeledSet& data, Loss loss, double& value) const;

  UpdateRule rule_;
  Architecture arch_;
  ParamRange range_;
  int t_ = 0;
  Vector prev_;    // momentum: previous iterate
  Vector m_, v_;   // adam moments / adagrad accumulator
  double max_cond_ = 0.0;
};

}  // namespace eqlab
