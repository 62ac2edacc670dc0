#pragma once

#include <string>

#include "eqlab/core/dataset.hpp"
#include "eqlab/training/predictor.hpp"

namespace eqlab {

// Feature maps realized by one-channel CNNs:
//   per-coordinate-squares  k=1, r=d, sum-of-squares pooling   -> (x_i²)
//   block-square-sums       k=1, r blocks, sum-of-squares      -> (‖block_b‖²)
//   conv2-square-sums       k=2, r=1, sum-of-squares           -> Σ(w0 x_i + w1 x_{i-1})²
//   per-coordinate-linear   k=1, r=d, sum pooling              -> (x_i)
enum class FeatureMap { PerCoordinateSquares, BlockSquareSums, Conv2SquareSums, PerCoordinateLinear };

std::string to_string(FeatureMap f);
FeatureMap parse_feature_map(const std::string& s);

struct ErmOptions {
  int blocks = 2;         // block-square-sums
  int angle_grid = 201;   // conv2: grid over sin(2θ) in [-1, 1]
};

struct ErmResult {
  Predictor predictor;
  double train_error = 0.0;
  bool degenerate = false;  // one-class dataset
  Vector coef;              // head weights followed by the bias
  double conv_mix = 0.0;    // conv2: chosen sin(2θ)
};

// Features (without the constant) for every column of x.
Matrix cnn_features(FeatureMap f, const Matrix& x, const ErmOptions& opt = {});

ErmResult erm_cnn_sign(FeatureMap f, const LabeledSet& data, const ErmOptions& opt = {});

struct RegressionFit {
  Predictor predictor;
  Vector coef;  // (α_1 … α_d, c)
};

// Minimum-norm least squares of y on (x_1², …, x_d², 1).
RegressionFit erm_cnn_regression(const LabeledSet& data);

// Logistic regression with a decreasing ridge, stopping at the first
// zero-error fit; falls back to the perceptron. Rows of phi are features.
Vector fit_linear_separator(const Matrix& phi, const Vector& y, double* train_error);

}  // namespace eqlab
