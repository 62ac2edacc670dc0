#include "eqlab/core/sym_projector.hpp"

#include <cmath>
#include <numbers>

#include "eqlab/core/error.hpp"

namespace eqlab {

Vector svec(const Matrix& a) {
  require_square(a, "svec");
  const int d = static_cast<int>(a.rows());
  Vector v(sym_dim(d));
  int k = 0;
  for (int i = 0; i < d; ++i) v(k++) = a(i, i);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) v(k++) = std::numbers::sqrt2 * 0.5 * (a(i, j) + a(j, i));
  return v;
}

Matrix smat(const Vector& v, int d) {
  if (v.size() != sym_dim(d)) throw DimensionError("smat: wrong svec length");
  Matrix a(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i) a(i, i) = v(k++);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) a(i, j) = a(j, i) = v(k++) / std::numbers::sqrt2;
  return a;
}

namespace {

Vector svec_outer(const Vector& x) {
  const int d = static_cast<int>(x.size());
  Vector v(sym_dim(d));
  int k = 0;
  for (int i = 0; i < d; ++i) v(k++) = x(i) * x(i);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) v(k++) = std::numbers::sqrt2 * x(i) * x(j);
  return v;
}

}  // namespace

SymProjector::SymProjector(int d, double rank_tol) : d_(d), tol_(rank_tol) {
  if (d < 1) throw PreconditionError("SymProjector requires d >= 1");
  basis_.resize(sym_dim(d), 0);
}

Vector SymProjector::residual(Vector v) const {
  // Two passes of modified Gram-Schmidt.
  for (int pass = 0; pass < 2; ++pass)
    for (int k = 0; k < rank_; ++k) v -= basis_.col(k).dot(v) * basis_.col(k);
  return v;
}

bool SymProjector::add(const Vector& x) {
  if (x.size() != d_) throw DimensionError("SymProjector::add: dimension mismatch");
  const Vector v = svec_outer(x);
  const double norm = v.norm();
  if (norm == 0.0 || rank_ == sym_dim(d_)) return false;
  Vector r = residual(v);
  const double rn = r.norm();
  if (rn <= tol_ * norm) return false;
  if (basis_.cols() <= rank_) basis_.conservativeResize(Eigen::NoChange, rank_ + 1);
  basis_.col(rank_++) = r / rn;
  return true;
}

Matrix SymProjector::project(const Matrix& a) const {
  if (a.rows() != d_ || a.cols() != d_) throw DimensionError("SymProjector::project: shape");
  return smat(residual(svec(a)), d_);
}

Matrix SymProjector::span_component(const Matrix& a) const {
  if (a.rows() != d_ || a.cols() != d_) throw DimensionError("SymProjector::span_component: shape");
  const Vector v = svec(a);
  return smat(v - residual(v), d_);
}

double SymProjector::complement_norm_sq(const Vector& x) const {
  if (x.size() != d_) throw DimensionError("SymProjector::complement_norm_sq: dimension");
  return residual(svec_outer(x)).squaredNorm();
}

SymProjector sym_projector(const Matrix& points, double rank_tol) {
  SymProjector p(static_cast<int>(points.rows()), rank_tol);
  for (Eigen::Index i = 0; i < points.cols(); ++i) p.add(points.col(i));
  return p;
}

}  // namespace eqlab
