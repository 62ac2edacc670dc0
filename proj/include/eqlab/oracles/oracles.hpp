#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eqlab/core/group.hpp"
#include "eqlab/core/linalg.hpp"

namespace eqlab {

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;  // sample stdev / √samples
  long samples = 0;
  std::uint64_t seed = 0;
};

// Welford accumulator behind every estimator.
class McAccumulator {
 public:
  void add(double x);
  long count() const { return n_; }
  // Requires at least two samples.
  McEstimate estimate(std::uint64_t seed) const;

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Standard normal quantile Φ⁻¹(p), e.g. 0.95 → 1.645.
double normal_quantile(double p);
// Wilson score interval bounds for k successes in n trials.
double wilson_lower(long k, long n, double z);
double wilson_upper(long k, long n, double z);

// Disagreement of h_U(u, v) = sign(uᵀ U v) and h_V over (u; v) ~ N(0, I_2d).
McEstimate rho_empirical(const Matrix& u, const Matrix& v, long samples, RngStream& rng);
// E arccos(clamp(uᵀ U Vᵀ u / ‖u‖²)) / π over Gaussian directions u.
McEstimate rho_arccos(const Matrix& u, const Matrix& v, long samples, RngStream& rng);

// E (xᵀ M x)² = 2‖sym M‖_F² + (tr M)² for x ~ N(0, I).
double matrix_var_closed(const Matrix& m);
McEstimate matrix_var_mc(const Matrix& m, long samples, RngStream& rng);

// max(0, d(d+1) − 2n).
double regression_floor(int d, int n);
// E ‖Π_n(x xᵀ)‖_F² with a fresh design of n Gaussian points and a fresh x per sample.
McEstimate regression_floor_mc(int d, int n, long samples, RngStream& rng);

struct PackingOptions {
  long construct_samples = 20000;  // shared sign bank during construction
  double construct_confidence = 0.9995;
  double margin = 0.1;             // candidates need LCB ≥ ε(1 + margin)
};

// Accepted rotations exp(S_i) with every pair certified ρ ≥ ε.
struct PackingSet {
  int d = 0;
  double epsilon = 0.0;
  std::vector<Matrix> exponents;  // skew S_i
  std::vector<Matrix> elements;   // exp(S_i)
  // Pair (i, j), i < j, in row-major order of the upper triangle.
  std::vector<McEstimate> pair_rho;
  std::vector<double> pair_lcb;
  int budget = 0;
  // True if the last tenth of the budget still produced acceptances, i.e. a
  // larger budget would likely grow the set.
  bool budget_exhausted = false;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(elements.size()); }
};

// Greedy packing of the spectral ball of radius π/4 in so(d), pushed through exp.
// Candidates whose Frobenius screen ‖U − V‖_F / (2√d) (an upper bound on ρ) is
// below ε are rejected without sampling. ε must lie in (0, 1).
PackingSet packing_construct(int d, double epsilon, int budget, RngStream& rng, const PackingOptions& opt = {});

struct PackingVerification {
  int pairs = 0;
  int certified = 0;
  double min_estimate = 0.0;
  double min_lcb = 0.0;
  double max_orthogonality_defect = 0.0;
  long samples = 0;
  double confidence = 0.95;
  bool all_certified() const { return certified == pairs; }
};

// Re-estimates every pair on fresh samples and certifies LCB ≥ ε.
PackingVerification packing_verify(const PackingSet& set, long samples, RngStream& rng, double confidence = 0.95);

// σ lists signs for pairs i < j in row-major order; d is inferred from its length.
// Returns exp(λ Σ σ_ij (e_i e_jᵀ − e_j e_iᵀ)); throws PreconditionError if some
// entry's sign disagrees with σ (λ too large).
GroupElement shatter_witness(const std::vector<int>& sigma, double lambda);

struct ShatterReport {
  int d = 0;
  long patterns = 0;
  long witnessed = 0;
  double max_orthogonality_defect = 0.0;
  double min_margin = 0.0;  // smallest σ_ij · W_ij
};
ShatterReport shatter_all(int d, double lambda);

struct ProjectionOptions {
  double c = 5.0;
  double delta = 0.01;
  // The bounds are stated for n ≤ d² / (12 ln²(d/δ)); outside it the check
  // refuses unless this is set.
  bool allow_outside_regime = false;
};

struct ProjectionReport {
  int d = 0, n = 0, trials = 0;
  bool in_regime = true;
  double regime_limit = 0.0;
  double upper_bound = 0.0, lower_bound = 0.0;  // d²/3 + c·d and 2d²/3 − c·d
  int upper_ok = 0;      // ‖Q(x⊗x)‖² ≤ d²/3 + c·d
  int lower_ok = 0;      // ‖(I − Q)(x⊗x)‖² ≥ 2d²/3 − c·d
  int both_ok = 0;
  double max_pythagoras_error = 0.0;  // relative to ‖x‖⁴
  std::vector<double> inside;         // ‖Q(x⊗x)‖² per trial
  std::vector<double> outside;        // ‖(I − Q)(x⊗x)‖² per trial
};

double projection_regime_limit(int d, double delta);
ProjectionReport projection_lemma_check(int d, int n, int trials, RngStream& rng, const ProjectionOptions& opt = {});

struct ScalarLemmaOptions {
  long arccos_points = 1000000;
  int sphere_matrices = 50;
  long sphere_samples = 20000;
  long gaussian_samples = 200000;
  int z_points = 61;  // grid on z/σ ∈ [0, 3]
  double sigma = 1.3;
};

struct ScalarLemmaReport {
  double arccos_min_ratio = 0.0;
  double arccos_argmin = 0.0;
  // Sphere mean: worst (estimate − bound) / se over all M, and the smallest
  // observed estimate / bound (the empirical constant).
  int sphere_tested = 0;
  int sphere_ok = 0;
  double sphere_worst_excess = 0.0;
  double sphere_empirical_c = 1.0;
  // Anti-concentration with the √(2/π) constant and, separately, with 2/√π.
  int z_tested = 0;
  int anti_ok = 0;
  int anti_ok_loose = 0;
  double anti_worst_excess = 0.0;

  bool arccos_ok() const;
  bool sphere_all_ok() const { return sphere_ok == sphere_tested; }
  bool anti_all_ok() const { return anti_ok == z_tested; }
};

// E ‖M x‖ over the unit sphere.
McEstimate sphere_norm_mc(const Matrix& m, long samples, RngStream& rng);
ScalarLemmaReport scalar_lemma_checks(RngStream& rng, const ScalarLemmaOptions& opt = {});

void write_csv(std::ostream& out, const ProjectionReport& r);
void write_csv(std::ostream& out, const ScalarLemmaReport& r);
void write_csv(std::ostream& out, const PackingSet& s, const PackingVerification& v);
std::string summary(const ProjectionReport& r);
std::string summary(const ScalarLemmaReport& r);
std::string summary(const PackingSet& s, const PackingVerification& v);
std::string summary(const ShatterReport& r);

}  // namespace eqlab
