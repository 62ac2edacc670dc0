#include "eqlab/training/optimizer.hpp"

#include <cmath>
#include <sstream>

#include "eqlab/core/error.hpp"

namespace eqlab {

UpdateRule UpdateRule::gd(double eta, int steps) {
  UpdateRule r;
  r.kind = Kind::GD;
  r.eta = eta;
  r.steps = steps;
  return r;
}

UpdateRule UpdateRule::momentum(double eta, double gamma, int steps) {
  UpdateRule r = gd(eta, steps);
  r.kind = Kind::Momentum;
  r.gamma = gamma;
  return r;
}

UpdateRule UpdateRule::lp_reg(double eta, double p, double lambda, int steps) {
  UpdateRule r = gd(eta, steps);
  r.kind = Kind::LpReg;
  r.p = p;
  r.lambda = lambda;
  return r;
}

UpdateRule UpdateRule::newton(double eta, int steps, double ridge) {
  UpdateRule r = gd(eta, steps);
  r.kind = Kind::Newton;
  r.ridge = ridge;
  return r;
}

UpdateRule UpdateRule::adam(double eta, int steps) {
  UpdateRule r = gd(eta, steps);
  r.kind = Kind::Adam;
  return r;
}

UpdateRule UpdateRule::adagrad(double eta, int steps) {
  UpdateRule r = gd(eta, steps);
  r.kind = Kind::AdaGrad;
  return r;
}

void UpdateRule::validate() const {
  if (!(eta > 0.0)) throw PreconditionError("update rule: eta must be positive");
  if (steps < 1) throw PreconditionError("update rule: step count must be at least 1");
  if (kind == Kind::Momentum && !(gamma >= 0.0 && gamma < 1.0))
    throw PreconditionError("update rule: momentum gamma must lie in [0, 1)");
  if (kind == Kind::Newton && !(ridge >= 0.0)) throw PreconditionError("update rule: ridge must be >= 0");
  if (lambda > 0.0 && !(p >= 1.0)) throw PreconditionError("update rule: lp exponent must be >= 1");
  if (!(lambda >= 0.0)) throw PreconditionError("update rule: lambda must be >= 0");
}

std::string to_string(UpdateRule::Kind k) {
  switch (k) {
    case UpdateRule::Kind::GD: return "gd";
    case UpdateRule::Kind::Momentum: return "momentum";
    case UpdateRule::Kind::LpReg: return "lp-reg";
    case UpdateRule::Kind::Newton: return "newton";
    case UpdateRule::Kind::Adam: return "adam";
    case UpdateRule::Kind::AdaGrad: return "adagrad";
  }
  return "?";
}

UpdateRule::Kind parse_rule_kind(const std::string& s) {
  if (s == "gd") return UpdateRule::Kind::GD;
  if (s == "momentum" || s == "gd-momentum") return UpdateRule::Kind::Momentum;
  if (s == "lp-reg" || s == "gd-lp-reg") return UpdateRule::Kind::LpReg;
  if (s == "newton") return UpdateRule::Kind::Newton;
  if (s == "adam") return UpdateRule::Kind::Adam;
  if (s == "adagrad") return UpdateRule::Kind::AdaGrad;
  throw PreconditionError("unknown update rule '" + s + "'");
}

std::string describe(const UpdateRule& r) {
  std::ostringstream os;
  os << to_string(r.kind) << "(eta=" << r.eta << ",T=" << r.steps;
  if (r.kind == UpdateRule::Kind::Momentum) os << ",gamma=" << r.gamma;
  if (r.lambda > 0.0) os << ",p=" << r.p << ",lambda=" << r.lambda;
  if (r.kind == UpdateRule::Kind::Newton) os << ",ridge=" << r.ridge;
  os << ")";
  return os.str();
}

Vector penalty_gradient(const Vector& w, double p) {
  Vector out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double s = w(i) > 0 ? 1.0 : (w(i) < 0 ? -1.0 : 0.0);
    out(i) = p == 2.0 ? 2.0 * w(i) : p * std::pow(std::abs(w(i)), p - 1.0) * s;
  }
  return out;
}

Optimizer::Optimizer(UpdateRule rule, Architecture arch) : rule_(std::move(rule)), arch_(std::move(arch)) {
  rule_.validate();
  range_ = rule_.trainable.value_or(all_params(arch_));
  if (range_.begin < 0 || range_.end > num_params(arch_) || range_.size() <= 0)
    throw PreconditionError("trainable parameter block out of range");
}

Vector Optimizer::masked_gradient(const Vector& theta, const LabeledSet& data, Loss loss, double& value) const {
  Vector g;
  value = loss_and_grad(arch_, theta, data, loss, g);
  Vector out = Vector::Zero(g.size());
  out.segment(range_.begin, range_.size()) = g.segment(range_.begin, range_.size());
  return out;
}

double Optimizer::step(Vector& theta, const LabeledSet& data, Loss loss) {
  double value = 0.0;
  Vector g = masked_gradient(theta, data, loss, value);
  const auto trained = [&](Vector& v) { return v.segment(range_.begin, range_.size()); };
  if (rule_.lambda > 0.0) trained(g) += rule_.lambda * penalty_gradient(theta.segment(range_.begin, range_.size()), rule_.p);
  ++t_;
  switch (rule_.kind) {
    case UpdateRule::Kind::GD: theta -= rule_.eta * g; break;
    case UpdateRule::Kind::Momentum: {
      // W_{t+1} = W_t - eta grad + gamma (W_t - W_{t-1}), with W_{-1} = W_0.
      if (prev_.size() == 0) prev_ = theta;
      const Vector cur = theta;
      theta += rule_.gamma * (cur - prev_) - rule_.eta * g;
      prev_ = cur;
      break;
    }
    case UpdateRule::Kind::LpReg: theta -= rule_.eta * g; break;
    case UpdateRule::Kind::Newton: {
      Matrix h = hessian(arch_, theta, data, loss, range_);
      if (rule_.lambda > 0.0 && rule_.p >= 2.0) {
        const auto w = theta.segment(range_.begin, range_.size());
        for (Eigen::Index i = 0; i < w.size(); ++i)
          h(i, i) += rule_.lambda * rule_.p * (rule_.p - 1.0) * std::pow(std::abs(w(i)), rule_.p - 2.0);
      }
      const double shift = rule_.ridge * std::abs(h.trace()) / static_cast<double>(h.rows());
      h.diagonal().array() += shift;
      Eigen::SelfAdjointEigenSolver<Matrix> es(h);
      const Vector ev = es.eigenvalues().cwiseAbs();
      const double cond = ev.minCoeff() > 0 ? ev.maxCoeff() / ev.minCoeff() : INFINITY;
      max_cond_ = std::max(max_cond_, cond);
      if (!(cond < 1e14))
        throw SingularHessianError(cond, "Newton step " + std::to_string(t_) + ": Hessian singular after ridge shift");
      const Vector gt = g.segment(range_.begin, range_.size());
      const Vector delta = es.eigenvectors() * (es.eigenvalues().cwiseInverse().asDiagonal() *
                                                (es.eigenvectors().transpose() * gt));
      trained(theta) -= rule_.eta * delta;
      break;
    }
    case UpdateRule::Kind::Adam: {
      if (m_.size() == 0) {
        m_ = Vector::Zero(theta.size());
        v_ = Vector::Zero(theta.size());
      }
      m_ = rule_.beta1 * m_ + (1.0 - rule_.beta1) * g;
      v_ = rule_.beta2 * v_ + (1.0 - rule_.beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(rule_.beta1, t_);
      const double c2 = 1.0 - std::pow(rule_.beta2, t_);
      const Vector step = (m_ / c1).cwiseQuotient(((v_ / c2).cwiseSqrt().array() + rule_.eps).matrix());
      trained(theta) -= rule_.eta * step.segment(range_.begin, range_.size());
      break;
    }
    case UpdateRule::Kind::AdaGrad: {
      if (v_.size() == 0) v_ = Vector::Zero(theta.size());
      v_ += g.cwiseProduct(g);
      const Vector step = g.cwiseQuotient((v_.cwiseSqrt().array() + rule_.eps).matrix());
      trained(theta) -= rule_.eta * step.segment(range_.begin, range_.size());
      break;
    }
  }
  return value;
}

}  // namespace eqlab
