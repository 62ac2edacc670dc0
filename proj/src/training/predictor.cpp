#include "eqlab/training/predictor.hpp"

#include "eqlab/core/error.hpp"

namespace eqlab {

Predictor::Predictor(BatchScore score, DecisionMode mode) : score_(std::move(score)), mode_(mode) {}

Predictor Predictor::constant(double value, DecisionMode mode) {
  return Predictor([value](const Matrix& x) { return Vector::Constant(x.cols(), value); }, mode);
}

double Predictor::score(const Vector& x) const {
  const Vector s = score_(x);
  return s(0);
}

double Predictor::predict(const Vector& x) const {
  const double s = score(x);
  return mode_ == DecisionMode::Sign ? sign_label(s) : s;
}

Vector Predictor::predict_batch(const Matrix& x) const {
  Vector s = score_(x);
  if (mode_ == DecisionMode::Sign) s = s.unaryExpr([](double v) { return sign_label(v); });
  return s;
}

double sign_error(const Predictor& p, const Matrix& x, const Vector& y) {
  if (x.cols() != y.size()) throw DimensionError("sign_error: point/label count mismatch");
  if (y.size() == 0) return 0.0;
  const Vector s = p.score_batch(x);
  int wrong = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) wrong += sign_label(s(i)) != y(i);
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

double mean_squared_error(const Predictor& p, const Matrix& x, const Vector& y) {
  if (x.cols() != y.size()) throw DimensionError("mean_squared_error: point/label count mismatch");
  if (y.size() == 0) return 0.0;
  return (p.score_batch(x) - y).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace eqlab
