#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eqlab/models/model.hpp"

namespace eqlab {

struct InitSpec {
  enum class Kind { GaussianIid, ZeroFirstLayer, SymmetricCoordinatewise };

  Kind kind = Kind::GaussianIid;
  double sigma = 1.0;
  // Multiplies the scale of each parameter block (FC layer, or CNN filter/head/bias).
  // Missing entries mean 1; 0 zeroes the block.
  std::vector<double> block_scales;
  // Symmetric per-coordinate sampler, scaled by sigma. Defaults to Rademacher.
  std::function<double(RngStream&)> sampler;
  std::string sampler_name = "rademacher";
  // Optional per-input-coordinate scales for the first FC layer's columns.
  Vector input_scales;

  static InitSpec gaussian(double sigma);
  static InitSpec zero_first_layer(double sigma);
  // Named symmetric samplers: rademacher, uniform, laplace.
  static InitSpec symmetric(const std::string& sampler, double sigma);
};

std::string to_string(InitSpec::Kind k);
Vector sample_init(const Architecture& arch, const InitSpec& spec, RngStream& rng);

}  // namespace eqlab
