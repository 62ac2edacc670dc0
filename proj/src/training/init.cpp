#include "eqlab/training/init.hpp"

#include <cmath>

#include "eqlab/core/error.hpp"

namespace eqlab {

InitSpec InitSpec::gaussian(double sigma) {
  InitSpec s;
  s.kind = Kind::GaussianIid;
  s.sigma = sigma;
  return s;
}

InitSpec InitSpec::zero_first_layer(double sigma) {
  InitSpec s = gaussian(sigma);
  s.kind = Kind::ZeroFirstLayer;
  return s;
}

InitSpec InitSpec::symmetric(const std::string& sampler, double sigma) {
  InitSpec s;
  s.kind = Kind::SymmetricCoordinatewise;
  s.sigma = sigma;
  s.sampler_name = sampler;
  if (sampler == "rademacher") {
    s.sampler = [](RngStream& r) { return static_cast<double>(r.sign()); };
  } else if (sampler == "uniform") {
    s.sampler = [](RngStream& r) { return r.uniform(-1.0, 1.0); };
  } else if (sampler == "laplace") {
    s.sampler = [](RngStream& r) { return r.sign() * -std::log(1.0 - r.uniform()); };
  } else {
    throw PreconditionError("unknown symmetric sampler '" + sampler + "'");
  }
  return s;
}

std::string to_string(InitSpec::Kind k) {
  switch (k) {
    case InitSpec::Kind::GaussianIid: return "gaussian";
    case InitSpec::Kind::ZeroFirstLayer: return "zero-first-layer";
    case InitSpec::Kind::SymmetricCoordinatewise: return "symmetric";
  }
  return "?";
}

Vector sample_init(const Architecture& arch, const InitSpec& spec, RngStream& rng) {
  validate(arch);
  if (!(spec.sigma > 0.0)) throw PreconditionError("init sigma must be positive");
  const int blocks = std::holds_alternative<FCShape>(arch) ? std::get<FCShape>(arch).depth() : 3;
  Vector theta(num_params(arch));
  for (int b = 0; b < blocks; ++b) {
    const ParamRange r = param_block(arch, b);
    const double scale = spec.sigma * (b < static_cast<int>(spec.block_scales.size()) ? spec.block_scales[b] : 1.0);
    for (int i = r.begin; i < r.end; ++i) {
      double v;
      if (spec.kind == InitSpec::Kind::SymmetricCoordinatewise)
        v = spec.sampler ? spec.sampler(rng) : static_cast<double>(rng.sign());
      else
        v = rng.normal();
      theta(i) = scale * v;
    }
    if (b == 0 && spec.kind == InitSpec::Kind::ZeroFirstLayer) theta.segment(r.begin, r.size()).setZero();
  }
  if (spec.input_scales.size() > 0) {
    const auto* fc = std::get_if<FCShape>(&arch);
    if (!fc || spec.input_scales.size() != fc->input_dim())
      throw DimensionError("input_scales must match the FC input dimension");
    const int rows = fc->widths[1], cols = fc->widths[0];
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) theta(i * cols + j) *= spec.input_scales(j);
  }
  return theta;
}

}  // namespace eqlab
