#pragma once

#include <functional>

#include "eqlab/core/dataset.hpp"
#include "eqlab/training/predictor.hpp"

namespace eqlab {

using Kernel = std::function<double(const Vector&, const Vector&)>;

Kernel linear_kernel();
// (uᵀv)², the covariance of ⟨M, uuᵀ⟩ under an entrywise standard Gaussian M.
Kernel quadratic_kernel();

Matrix gram_matrix(const Kernel& k, const Matrix& x);

// sign(K(x, X) K(X, X)⁺ y). Rejects asymmetric kernels (1e-10) and Gram
// matrices with eigenvalues below -1e-8 relative to the largest.
Predictor kernel_regression_sign(const Kernel& k, const LabeledSet& data);

// Gaussian conditioning for y = xᵀMx with M entrywise N(0, 1).
class BayesQuadratic {
 public:
  explicit BayesQuadratic(const Matrix& design);

  int size() const { return static_cast<int>(x_.cols()); }
  // Posterior-mean weights for labels y: α = G⁺y.
  Vector weights(const Vector& y) const;
  // Posterior mean at each column of `points`.
  Vector mean(const Vector& alpha, const Matrix& points) const;
  // k(x,x) - k_xᵀ G⁺ k_x for each column.
  Vector variance(const Matrix& points) const;

 private:
  Matrix x_;
  Matrix gpinv_;
};

struct BayesRegressor {
  Predictor mean;
  std::function<double(const Vector&)> variance;
};

BayesRegressor bayes_quadratic_regressor(const LabeledSet& data);

}  // namespace eqlab
