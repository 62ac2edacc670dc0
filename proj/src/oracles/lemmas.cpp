#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "eqlab/core/error.hpp"
#include "eqlab/oracles/oracles.hpp"

namespace eqlab {

double projection_regime_limit(int d, double delta) {
  const double l = std::log(d / delta);
  return static_cast<double>(d) * d / (12.0 * l * l);
}

namespace {

Vector self_kron(const Vector& x) {
  const Eigen::Index d = x.size();
  Vector v(d * d);
  for (Eigen::Index i = 0; i < d; ++i) v.segment(i * d, d) = x(i) * x;
  return v;
}

}  // namespace

ProjectionReport projection_lemma_check(int d, int n, int trials, RngStream& rng, const ProjectionOptions& opt) {
  if (d < 1 || n < 0 || trials < 1) throw PreconditionError("projection_lemma_check: need d ≥ 1, n ≥ 0, trials ≥ 1");
  if (!(opt.delta > 0.0 && opt.delta < 1.0)) throw PreconditionError("projection_lemma_check: delta must lie in (0, 1)");
  if (n > d * d) throw PreconditionError("projection_lemma_check: n exceeds d²");
  ProjectionReport rep;
  rep.d = d;
  rep.n = n;
  rep.trials = trials;
  rep.regime_limit = projection_regime_limit(d, opt.delta);
  rep.in_regime = d >= 20 && n <= rep.regime_limit;
  if (!rep.in_regime && !opt.allow_outside_regime) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "projection_lemma_check: the bounds need d ≥ 20 and n ≤ d²/(12 ln²(d/δ)) = %.3f; got d = %d, n = %d",
                  rep.regime_limit, d, n);
    throw PreconditionError(buf);
  }
  const double dd = static_cast<double>(d) * d;
  const double upper = dd / 3.0 + opt.c * d;
  const double lower = 2.0 * dd / 3.0 - opt.c * d;
  rep.upper_bound = upper;
  rep.lower_bound = lower;
  for (int t = 0; t < trials; ++t) {
    Matrix a(d * d, n);
    for (int i = 0; i < n; ++i) a.col(i) = self_kron(gaussian_vector(d, rng));
    const Vector x = gaussian_vector(d, rng);
    const Vector v = self_kron(x);
    double inside = 0.0, outside = v.squaredNorm();
    if (n > 0) {
      const Matrix q = a.householderQr().householderQ() * Matrix::Identity(d * d, n);
      const Vector coef = q.transpose() * v;
      inside = coef.squaredNorm();
      outside = (v - q * coef).squaredNorm();
    }
    const double x4 = std::pow(x.squaredNorm(), 2);
    rep.max_pythagoras_error = std::max(rep.max_pythagoras_error, std::abs(inside + outside - x4) / x4);
    rep.inside.push_back(inside);
    rep.outside.push_back(outside);
    rep.upper_ok += inside <= upper;
    rep.lower_ok += outside >= lower;
    rep.both_ok += inside <= upper && outside >= lower;
  }
  return rep;
}

bool ScalarLemmaReport::arccos_ok() const { return arccos_min_ratio >= std::sqrt(2.0) - 1e-4; }

ScalarLemmaReport scalar_lemma_checks(RngStream& rng, const ScalarLemmaOptions& opt) {
  if (opt.arccos_points < 2 || opt.sphere_matrices < 1 || opt.z_points < 2 || !(opt.sigma > 0.0))
    throw PreconditionError("scalar_lemma_checks: bad options");
  ScalarLemmaReport rep;

  rep.arccos_min_ratio = std::numeric_limits<double>::infinity();
  const double hi = 1.0 - 1e-9;
  for (long i = 0; i < opt.arccos_points; ++i) {
    const double x = -1.0 + (hi + 1.0) * static_cast<double>(i) / static_cast<double>(opt.arccos_points - 1);
    const double r = std::acos(x) / std::sqrt(1.0 - x);
    if (r < rep.arccos_min_ratio) {
      rep.arccos_min_ratio = r;
      rep.arccos_argmin = x;
    }
  }

  const int dims[] = {2, 8, 32};
  rep.sphere_worst_excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < opt.sphere_matrices; ++i) {
    const int d = dims[i % 3];
    RngStream r = rng.child(static_cast<std::uint64_t>(i));
    Matrix m = gaussian_matrix(d, d, r);
    // Spread the spectrum so that low-rank-like and isotropic cases both appear.
    for (int j = 0; j < d; ++j) m.col(j) *= std::exp(1.5 * r.normal());
    const McEstimate est = sphere_norm_mc(m, opt.sphere_samples, r);
    const double bound = m.norm() / std::sqrt(static_cast<double>(d));
    ++rep.sphere_tested;
    rep.sphere_ok += est.mean <= bound + 3.0 * est.se + 1e-12 * bound;
    rep.sphere_worst_excess = std::max(rep.sphere_worst_excess, (est.mean - bound) / std::max(est.se, 1e-300));
    rep.sphere_empirical_c = std::min(rep.sphere_empirical_c, est.mean / bound);
  }

  RngStream g = rng.child(1u << 20);
  std::vector<double> absx(static_cast<size_t>(opt.gaussian_samples));
  for (auto& a : absx) a = std::abs(g.normal(0.0, opt.sigma));
  std::sort(absx.begin(), absx.end());
  const double nn = static_cast<double>(absx.size());
  rep.anti_worst_excess = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < opt.z_points; ++k) {
    const double z = 3.0 * opt.sigma * k / (opt.z_points - 1);
    const double p = static_cast<double>(std::upper_bound(absx.begin(), absx.end(), z) - absx.begin()) / nn;
    const double se = std::sqrt(p * (1.0 - p) / nn);
    const double tight = std::sqrt(2.0 / M_PI) * z / opt.sigma;
    const double loose = 2.0 / std::sqrt(M_PI) * z / opt.sigma;
    ++rep.z_tested;
    rep.anti_ok += p <= tight + 3.0 * se;
    rep.anti_ok_loose += p <= loose + 3.0 * se;
    rep.anti_worst_excess = std::max(rep.anti_worst_excess, p - tight - 3.0 * se);
  }
  return rep;
}

void write_csv(std::ostream& out, const ProjectionReport& r) {
  out << "trial,d,n,inside,outside,upper_bound,lower_bound\n";
  char buf[256];
  for (size_t t = 0; t < r.inside.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%d,%.10g,%.10g,%.10g,%.10g\n", t, r.d, r.n, r.inside[t], r.outside[t],
                  r.upper_bound, r.lower_bound);
    out << buf;
  }
}

void write_csv(std::ostream& out, const ScalarLemmaReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "check,value\narccos_min_ratio,%.12g\narccos_argmin,%.12g\nsphere_ok,%d/%d\nsphere_worst_excess_se,%."
                "6g\nsphere_empirical_c,%.6g\nanti_ok,%d/%d\nanti_ok_two_over_sqrt_pi,%d/%d\nanti_worst_excess,%.6g\n",
                r.arccos_min_ratio, r.arccos_argmin, r.sphere_ok, r.sphere_tested, r.sphere_worst_excess,
                r.sphere_empirical_c, r.anti_ok, r.z_tested, r.anti_ok_loose, r.z_tested, r.anti_worst_excess);
  out << buf;
}

void write_csv(std::ostream& out, const PackingSet& s, const PackingVerification& v) {
  out << "i,j,rho,se,construct_lcb\n";
  char buf[160];
  size_t idx = 0;
  for (int i = 0; i < s.size(); ++i)
    for (int j = i + 1; j < s.size(); ++j, ++idx) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.8g,%.4g,%.8g\n", i, j, s.pair_rho[idx].mean, s.pair_rho[idx].se,
                    s.pair_lcb[idx]);
      out << buf;
    }
  std::snprintf(buf, sizeof buf, "# verified %d/%d pairs, min lcb %.6g at %.2f confidence\n", v.certified, v.pairs,
                v.min_lcb, v.confidence);
  out << buf;
}

std::string summary(const ProjectionReport& r) {
  char buf[400];
  std::snprintf(buf, sizeof buf,
                "projection d=%d n=%d trials=%d%s: upper bound held %d, lower bound held %d, both %d; max Pythagoras "
                "error %.2e",
                r.d, r.n, r.trials, r.in_regime ? "" : " (outside the stated regime)", r.upper_ok, r.lower_ok,
                r.both_ok, r.max_pythagoras_error);
  return buf;
}

std::string summary(const ScalarLemmaReport& r) {
  char buf[400];
  std::snprintf(buf, sizeof buf,
                "arccos ratio min %.8f at x=%.6g; sphere bound %d/%d (empirical C %.4f); anti-concentration "
                "sqrt(2/pi) %d/%d, 2/sqrt(pi) %d/%d",
                r.arccos_min_ratio, r.arccos_argmin, r.sphere_ok, r.sphere_tested, r.sphere_empirical_c, r.anti_ok,
                r.z_tested, r.anti_ok_loose, r.z_tested);
  return buf;
}

std::string summary(const PackingSet& s, const PackingVerification& v) {
  std::ostringstream os;
  os << "packing d=" << s.d << " eps=" << s.epsilon << ": " << s.size() << " elements from budget " << s.budget
     << (s.budget_exhausted ? " (still growing)" : "") << "; verified " << v.certified << "/" << v.pairs
     << " pairs, min lcb " << v.min_lcb;
  return os.str();
}

std::string summary(const ShatterReport& r) {
  std::ostringstream os;
  os << "shatter d=" << r.d << ": " << r.witnessed << "/" << r.patterns << " patterns witnessed, orthogonality defect "
     << r.max_orthogonality_defect << ", min margin " << r.min_margin;
  return os.str();
}

}  // namespace eqlab
