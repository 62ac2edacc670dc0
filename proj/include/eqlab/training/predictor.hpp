#pragma once

#include <functional>
#include <string>

#include "eqlab/core/linalg.hpp"

namespace eqlab {

enum class DecisionMode { Sign, Raw };

inline double sign_label(double score) { return score >= 0.0 ? 1.0 : -1.0; }

// A learned hypothesis. Scores are computed column-wise on a d×n batch.
class Predictor {
 public:
  using BatchScore = std::function<Vector(const Matrix&)>;

  Predictor() = default;
  Predictor(BatchScore score, DecisionMode mode);

  static Predictor constant(double value, DecisionMode mode);

  double score(const Vector& x) const;
  Vector score_batch(const Matrix& x) const { return score_(x); }
  // Sign mode maps scores to ±1 with sign(0) = +1; raw mode returns the score.
  double predict(const Vector& x) const;
  Vector predict_batch(const Matrix& x) const;
  DecisionMode mode() const { return mode_; }

  // Set by learners that could not meet their contract (e.g. non-separable data).
  bool flagged = false;
  std::string note;

 private:
  BatchScore score_;
  DecisionMode mode_ = DecisionMode::Sign;
};

// Fraction of points whose predicted sign differs from the label.
double sign_error(const Predictor& p, const Matrix& x, const Vector& y);
// Mean squared error of raw predictions.
double mean_squared_error(const Predictor& p, const Matrix& x, const Vector& y);

}  // namespace eqlab
