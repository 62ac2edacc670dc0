#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "eqlab/core/error.hpp"
#include "eqlab/core/sym_projector.hpp"
#include "eqlab/oracles/oracles.hpp"

namespace eqlab {

void McAccumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

McEstimate McAccumulator::estimate(std::uint64_t seed) const {
  if (n_ < 2) throw PreconditionError("Monte-Carlo estimate needs at least two samples");
  const double var = m2_ / static_cast<double>(n_ - 1);
  return {mean_, std::sqrt(var / static_cast<double>(n_)), n_, seed};
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw PreconditionError("normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

namespace {

void wilson(long k, long n, double z, double& lo, double& hi) {
  if (n <= 0 || k < 0 || k > n) throw PreconditionError("wilson interval: need 0 ≤ k ≤ n, n > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  lo = std::max(0.0, centre - half);
  hi = std::min(1.0, centre + half);
}

void require_same_orthogonal(const Matrix& u, const Matrix& v) {
  require_square(u, "rho: U");
  require_square(v, "rho: V");
  if (u.rows() != v.rows()) throw DimensionError("rho: U and V differ in size");
}

constexpr long kBatch = 4096;

}  // namespace

double wilson_lower(long k, long n, double z) {
  double lo, hi;
  wilson(k, n, z, lo, hi);
  return lo;
}

double wilson_upper(long k, long n, double z) {
  double lo, hi;
  wilson(k, n, z, lo, hi);
  return hi;
}

McEstimate rho_empirical(const Matrix& u, const Matrix& v, long samples, RngStream& rng) {
  require_same_orthogonal(u, v);
  if (samples < 2) throw PreconditionError("rho_empirical: need at least two samples");
  const Eigen::Index d = u.rows();
  McAccumulator acc;
  for (long done = 0; done < samples;) {
    const long b = std::min(kBatch, samples - done);
    const Matrix a = gaussian_matrix(d, b, rng);
    const Matrix c = gaussian_matrix(d, b, rng);
    const Vector su = (a.cwiseProduct(u * c)).colwise().sum().transpose();
    const Vector sv = (a.cwiseProduct(v * c)).colwise().sum().transpose();
    for (long i = 0; i < b; ++i) acc.add((su(i) >= 0.0) != (sv(i) >= 0.0) ? 1.0 : 0.0);
    done += b;
  }
  return acc.estimate(rng.seed());
}

McEstimate rho_arccos(const Matrix& u, const Matrix& v, long samples, RngStream& rng) {
  require_same_orthogonal(u, v);
  if (samples < 2) throw PreconditionError("rho_arccos: need at least two samples");
  const Eigen::Index d = u.rows();
  McAccumulator acc;
  for (long done = 0; done < samples;) {
    const long b = std::min(kBatch, samples - done);
    const Matrix x = gaussian_matrix(d, b, rng);
    const Matrix a = u.transpose() * x;
    const Matrix c = v.transpose() * x;
    for (long i = 0; i < b; ++i) {
      const double cosine = std::clamp(a.col(i).dot(c.col(i)) / x.col(i).squaredNorm(), -1.0, 1.0);
      acc.add(std::acos(cosine) / M_PI);
    }
    done += b;
  }
  return acc.estimate(rng.seed());
}

double matrix_var_closed(const Matrix& m) {
  require_square(m, "matrix_var_closed");
  const Eigen::Index d = m.rows();
  double fro = 0.0, tr = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    tr += m(i, i);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double s = 0.5 * (m(i, j) + m(j, i));
      fro += s * s;
    }
  }
  return 2.0 * fro + tr * tr;
}

McEstimate matrix_var_mc(const Matrix& m, long samples, RngStream& rng) {
  require_square(m, "matrix_var_mc");
  if (samples < 2) throw PreconditionError("matrix_var_mc: need at least two samples");
  // xᵀMx = xᵀ sym(M) x; the symmetric part makes skew M give exact zeros.
  const Matrix sym = 0.5 * (m + m.transpose());
  McAccumulator acc;
  for (long done = 0; done < samples;) {
    const long b = std::min(kBatch, samples - done);
    const Matrix x = gaussian_matrix(m.rows(), b, rng);
    const Vector q = x.cwiseProduct(sym * x).colwise().sum().transpose();
    for (long i = 0; i < b; ++i) acc.add(q(i) * q(i));
    done += b;
  }
  return acc.estimate(rng.seed());
}

double regression_floor(int d, int n) {
  if (d < 1 || n < 0) throw PreconditionError("regression_floor: need d ≥ 1 and n ≥ 0");
  return std::max(0.0, static_cast<double>(d) * (d + 1) - 2.0 * n);
}

McEstimate regression_floor_mc(int d, int n, long samples, RngStream& rng) {
  if (d < 1 || n < 0) throw PreconditionError("regression_floor_mc: need d ≥ 1 and n ≥ 0");
  if (samples < 2) throw PreconditionError("regression_floor_mc: need at least two samples");
  McAccumulator acc;
  for (long s = 0; s < samples; ++s) {
    const SymProjector proj = sym_projector(gaussian_matrix(d, n, rng));
    acc.add(proj.complement_norm_sq(gaussian_vector(d, rng)));
  }
  return acc.estimate(rng.seed());
}

McEstimate sphere_norm_mc(const Matrix& m, long samples, RngStream& rng) {
  if (samples < 2) throw PreconditionError("sphere_norm_mc: need at least two samples");
  McAccumulator acc;
  for (long done = 0; done < samples;) {
    const long b = std::min(kBatch, samples - done);
    Matrix x = gaussian_matrix(m.cols(), b, rng);
    x.colwise().normalize();
    const Matrix y = m * x;
    for (long i = 0; i < b; ++i) acc.add(y.col(i).norm());
    done += b;
  }
  return acc.estimate(rng.seed());
}

}  // namespace eqlab
