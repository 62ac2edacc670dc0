#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eqlab/core/dataset.hpp"
#include "eqlab/core/group.hpp"
#include "eqlab/core/linalg.hpp"

namespace eqlab {

enum class Activation { Quadratic, Relu, Identity };
enum class Pooling { SumOfSquares, Sum };
enum class Loss { Logistic, Squared };

std::string to_string(Activation a);
std::string to_string(Pooling p);
Activation parse_activation(const std::string& s);
Pooling parse_pooling(const std::string& s);

// widths = (d_0, d_1, ..., d_L) with d_L = 1.
struct FCShape {
  std::vector<int> widths;
  Activation activation = Activation::Quadratic;

  int input_dim() const { return widths.front(); }
  int depth() const { return static_cast<int>(widths.size()) - 1; }
};

// One-channel convolution over R^d, pooled over `blocks` segments of length `block`.
struct CNNGeometry {
  int d = 0;
  int block = 0;
  int blocks = 0;
  int k = 1;
  Pooling pooling = Pooling::SumOfSquares;
};

using Architecture = std::variant<FCShape, CNNGeometry>;

struct FCWeights {
  std::vector<Matrix> layers;  // W_i is d_i × d_{i-1}
  Activation activation = Activation::Quadratic;
};

struct CNNWeights {
  Vector w;  // filter, length k
  Vector a;  // head, length r
  double b = 0.0;
  CNNGeometry geometry;
};

using Weights = std::variant<FCWeights, CNNWeights>;
// A gradient has exactly the shape of the weights it differentiates.
using Gradient = Weights;

// Half-open contiguous block of flat parameter indices.
struct ParamRange {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
};

void validate(const Architecture& arch);
void validate(const Weights& w);
Architecture architecture_of(const Weights& w);
int input_dim(const Architecture& arch);
int num_params(const Architecture& arch);
ParamRange all_params(const Architecture& arch);
// FC: layer index 0..L-1. CNN: 0 = filter, 1 = head, 2 = bias.
ParamRange param_block(const Architecture& arch, int index);

// Flat layout: FC layers in order, each row-major; CNN as [w, a, b].
Vector flatten(const Weights& w);
Weights unflatten(const Architecture& arch, const Vector& theta);
Weights zeros_like(const Architecture& arch);

double fc_forward(const FCWeights& w, const Vector& x);
double cnn_forward(const CNNWeights& w, const Vector& x);
double forward(const Weights& w, const Vector& x);
// Scores for each column of a d×n matrix.
Vector forward_batch(const Architecture& arch, const Vector& theta, const Matrix& x);
Vector forward_batch(const Weights& w, const Matrix& x);

// Summed surrogate loss. Logistic is log(1+e^{-yf})/ln 2; squared is (f-y)².
double loss_value(const Architecture& arch, const Vector& theta, const LabeledSet& data, Loss loss);
// Loss and its exact gradient with respect to theta.
double loss_and_grad(const Architecture& arch, const Vector& theta, const LabeledSet& data,
                     Loss loss, Vector& grad);
double surrogate(double z, Loss loss, double y);

Gradient grad(const Weights& w, const LabeledSet& data, Loss loss);
// Second derivatives restricted to `subset` (default: all parameters).
Matrix hessian(const Architecture& arch, const Vector& theta, const LabeledSet& data, Loss loss,
               std::optional<ParamRange> subset = std::nullopt);
Matrix hessian(const Weights& w, const LabeledSet& data, Loss loss,
               std::optional<ParamRange> subset = std::nullopt);

// τ(g): replaces W_1 with W_1 g⁻¹. Only the FC model carries this action.
FCWeights weight_action(const GroupElement& g, const FCWeights& w);
Vector weight_action_flat(const Architecture& arch, const GroupElement& g, const Vector& theta);

// Binary checkpoint: "EQLW", version, kind, geometry, then little-endian doubles.
void write_weights(std::ostream& out, const Weights& w);
Weights read_weights(std::istream& in);

}  // namespace eqlab
