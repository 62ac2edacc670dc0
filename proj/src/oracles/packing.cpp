#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <cstdint>

#include "eqlab/core/error.hpp"
#include "eqlab/oracles/oracles.hpp"

namespace eqlab {

namespace {

// Shared (u, v) sample pairs; one bit per pair records sign(uᵀ U v) ≥ 0.
class SignBank {
 public:
  SignBank(int d, long samples, RngStream& rng)
      : a_(gaussian_matrix(d, samples, rng)), c_(gaussian_matrix(d, samples, rng)), words_((samples + 63) / 64) {}

  std::vector<std::uint64_t> bits(const Matrix& u) const {
    std::vector<std::uint64_t> out(words_, 0);
    const Eigen::Index n = a_.cols();
    constexpr Eigen::Index kChunk = 4096;
    for (Eigen::Index s = 0; s < n; s += kChunk) {
      const Eigen::Index b = std::min(kChunk, n - s);
      const Vector vals = a_.middleCols(s, b).cwiseProduct(u * c_.middleCols(s, b)).colwise().sum().transpose();
      for (Eigen::Index i = 0; i < b; ++i)
        if (vals(i) >= 0.0) out[(s + i) / 64] |= std::uint64_t{1} << ((s + i) % 64);
    }
    return out;
  }

  long samples() const { return static_cast<long>(a_.cols()); }

 private:
  Matrix a_, c_;
  size_t words_;
};

long disagreements(const std::vector<std::uint64_t>& x, const std::vector<std::uint64_t>& y) {
  long k = 0;
  for (size_t i = 0; i < x.size(); ++i) k += std::popcount(x[i] ^ y[i]);
  return k;
}

McEstimate bernoulli_estimate(long k, long n, std::uint64_t seed) {
  const double p = static_cast<double>(k) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n - 1)), n, seed};
}

// Uniform draw from the spectral-norm ball of radius r in so(d).
Matrix skew_in_ball(int d, double r, RngStream& rng) {
  const Matrix g = gaussian_matrix(d, d, rng);
  Matrix s = 0.5 * (g - g.transpose());
  const double norm = Eigen::JacobiSVD<Matrix>(s).singularValues()(0);
  const double dim = 0.5 * d * (d - 1);
  return s * (r * std::pow(rng.uniform(), 1.0 / dim) / norm);
}

}  // namespace

PackingSet packing_construct(int d, double epsilon, int budget, RngStream& rng, const PackingOptions& opt) {
  if (d < 2) throw PreconditionError("packing_construct: d must be at least 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw PreconditionError("packing_construct: epsilon must lie in (0, 1)");
  if (budget < 1) throw PreconditionError("packing_construct: budget must be positive");
  if (opt.construct_samples < 2) throw PreconditionError("packing_construct: need at least two samples");

  PackingSet set;
  set.d = d;
  set.epsilon = epsilon;
  set.budget = budget;
  set.seed = rng.seed();

  RngStream bank_rng = rng.child(0);
  RngStream cand_rng = rng.child(1);
  const SignBank bank(d, opt.construct_samples, bank_rng);
  const long n = bank.samples();
  const double z = normal_quantile(opt.construct_confidence);
  const double target = epsilon * (1.0 + opt.margin);
  const double screen_scale = 1.0 / (2.0 * std::sqrt(static_cast<double>(d)));

  std::vector<std::vector<std::uint64_t>> signs;
  int last_accept = -1;
  for (int c = 0; c < budget; ++c) {
    const Matrix s = skew_in_ball(d, M_PI / 4.0, cand_rng);
    const Matrix u = skew_exp_matrix(s);
    bool ok = true;
    for (const Matrix& v : set.elements)
      if ((u - v).norm() * screen_scale < target) {
        ok = false;
        break;
      }
    if (!ok) continue;
    std::vector<std::uint64_t> bits = bank.bits(u);
    for (const auto& other : signs) {
      const long k = disagreements(bits, other);
      if (wilson_lower(k, n, z) < target) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    set.exponents.push_back(s);
    set.elements.push_back(u);
    signs.push_back(std::move(bits));
    last_accept = c;
  }
  set.budget_exhausted = last_accept >= budget - budget / 10;

  const int m = set.size();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const long k = disagreements(signs[i], signs[j]);
      set.pair_rho.push_back(bernoulli_estimate(k, n, set.seed));
      set.pair_lcb.push_back(wilson_lower(k, n, z));
    }
  return set;
}

PackingVerification packing_verify(const PackingSet& set, long samples, RngStream& rng, double confidence) {
  if (samples < 2) throw PreconditionError("packing_verify: need at least two samples");
  PackingVerification out;
  out.samples = samples;
  out.confidence = confidence;
  for (const Matrix& u : set.elements) out.max_orthogonality_defect = std::max(out.max_orthogonality_defect, orthogonality_defect(u));
  if (set.size() < 2) return out;

  const SignBank bank(set.d, samples, rng);
  const double z = normal_quantile(confidence);
  std::vector<std::vector<std::uint64_t>> signs;
  for (const Matrix& u : set.elements) signs.push_back(bank.bits(u));
  out.min_estimate = out.min_lcb = 1.0;
  for (int i = 0; i < set.size(); ++i)
    for (int j = i + 1; j < set.size(); ++j) {
      const long k = disagreements(signs[i], signs[j]);
      const double lcb = wilson_lower(k, samples, z);
      ++out.pairs;
      out.certified += lcb >= set.epsilon;
      out.min_lcb = std::min(out.min_lcb, lcb);
      out.min_estimate = std::min(out.min_estimate, static_cast<double>(k) / samples);
    }
  return out;
}

GroupElement shatter_witness(const std::vector<int>& sigma, double lambda) {
  if (!(lambda > 0.0)) throw PreconditionError("shatter_witness: lambda must be positive");
  const size_t m = sigma.size();
  const int d = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * m)) / 2.0));
  if (static_cast<size_t>(d) * (d - 1) / 2 != m || d < 2)
    throw DimensionError("shatter_witness: pattern length must be d(d-1)/2 for some d ≥ 2");
  Matrix u = Matrix::Zero(d, d);
  size_t idx = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++idx) {
      if (sigma[idx] != 1 && sigma[idx] != -1) throw PreconditionError("shatter_witness: pattern entries must be ±1");
      u(i, j) = sigma[idx];
      u(j, i) = -sigma[idx];
    }
  GroupElement w = skew_exp(lambda * u);
  const Matrix q = w.matrix();
  idx = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++idx)
      if (!(q(i, j) * sigma[idx] > 0.0))
        throw PreconditionError("shatter_witness: sign of entry (" + std::to_string(i) + "," + std::to_string(j) +
                                ") disagrees with the pattern; use a smaller lambda");
  return w;
}

ShatterReport shatter_all(int d, double lambda) {
  if (d < 2 || d > 8) throw PreconditionError("shatter_all: d must lie in [2, 8]");
  ShatterReport rep;
  rep.d = d;
  const int m = d * (d - 1) / 2;
  rep.patterns = 1L << m;
  rep.min_margin = std::numeric_limits<double>::infinity();
  std::vector<int> sigma(m);
  for (long mask = 0; mask < rep.patterns; ++mask) {
    for (int b = 0; b < m; ++b) sigma[b] = (mask >> b) & 1 ? 1 : -1;
    try {
      const Matrix q = shatter_witness(sigma, lambda).matrix();
      ++rep.witnessed;
      rep.max_orthogonality_defect = std::max(rep.max_orthogonality_defect, orthogonality_defect(q));
      int idx = 0;
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j, ++idx) rep.min_margin = std::min(rep.min_margin, q(i, j) * sigma[idx]);
    } catch (const PreconditionError&) {
    }
  }
  return rep;
}

}  // namespace eqlab
