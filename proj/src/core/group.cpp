#include "eqlab/core/group.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eqlab/core/error.hpp"

namespace eqlab {

std::string to_string(GroupKind k) {
  switch (k) {
    case GroupKind::Orthogonal: return "orthogonal";
    case GroupKind::Permutation: return "permutation";
    case GroupKind::SignFlip: return "sign-flip";
    case GroupKind::GeneralLinear: return "general-linear";
  }
  return "?";
}

GroupKind parse_group_kind(const std::string& s) {
  if (s == "orthogonal" || s == "haar") return GroupKind::Orthogonal;
  if (s == "permutation" || s == "perm") return GroupKind::Permutation;
  if (s == "sign-flip" || s == "signflip" || s == "sign") return GroupKind::SignFlip;
  if (s == "general-linear" || s == "linear" || s == "gl") return GroupKind::GeneralLinear;
  throw PreconditionError("unknown group kind '" + s + "'");
}

GroupElement GroupElement::identity(int d) {
  std::vector<int> p(static_cast<std::size_t>(d));
  std::iota(p.begin(), p.end(), 0);
  return permutation(std::move(p));
}

GroupElement GroupElement::orthogonal(Matrix q, double tol) {
  require_square(q, "orthogonal group element");
  require_finite(q, "orthogonal group element");
  const double defect = orthogonality_defect(q);
  if (defect > tol)
    throw PreconditionError("matrix is not orthogonal: ||QtQ - I||_max = " + std::to_string(defect));
  GroupElement g;
  g.kind_ = GroupKind::Orthogonal;
  g.dim_ = static_cast<int>(q.rows());
  g.mat_ = std::move(q);
  return g;
}

GroupElement GroupElement::permutation(std::vector<int> perm) {
  const int d = static_cast<int>(perm.size());
  if (d == 0) throw DimensionError("permutation of empty index set");
  std::vector<char> seen(perm.size(), 0);
  for (int v : perm) {
    if (v < 0 || v >= d || seen[static_cast<std::size_t>(v)])
      throw PreconditionError("permutation is not a bijection on indices");
    seen[static_cast<std::size_t>(v)] = 1;
  }
  GroupElement g;
  g.kind_ = GroupKind::Permutation;
  g.dim_ = d;
  g.perm_ = std::move(perm);
  return g;
}

GroupElement GroupElement::sign_flip(Vector signs) {
  if (signs.size() == 0) throw DimensionError("sign flip of empty vector");
  for (Eigen::Index i = 0; i < signs.size(); ++i)
    if (signs(i) != 1.0 && signs(i) != -1.0)
      throw PreconditionError("sign-flip entries must be +1 or -1");
  GroupElement g;
  g.kind_ = GroupKind::SignFlip;
  g.dim_ = static_cast<int>(signs.size());
  g.signs_ = std::move(signs);
  return g;
}

GroupElement GroupElement::general_linear(Matrix a, double cond_bound) {
  require_square(a, "general-linear group element");
  require_finite(a, "general-linear group element");
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  const double cond = s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : INFINITY;
  if (!(cond <= cond_bound))
    throw PreconditionError("condition number " + std::to_string(cond) + " exceeds bound " +
                            std::to_string(cond_bound));
  GroupElement g;
  g.kind_ = GroupKind::GeneralLinear;
  g.dim_ = static_cast<int>(a.rows());
  g.inv_ = a.partialPivLu().inverse();
  g.mat_ = std::move(a);
  g.cond_bound_ = cond_bound;
  return g;
}

static void check_dim(int d, Eigen::Index n) {
  if (n != d)
    throw DimensionError("group element acts on R^" + std::to_string(d) + ", got length " +
                         std::to_string(n));
}

Vector GroupElement::apply(const Vector& x) const {
  check_dim(dim_, x.size());
  switch (kind_) {
    case GroupKind::Orthogonal:
    case GroupKind::GeneralLinear: return mat_ * x;
    case GroupKind::SignFlip: return signs_.cwiseProduct(x);
    case GroupKind::Permutation: {
      Vector y(dim_);
      for (int i = 0; i < dim_; ++i) y(i) = x(perm_[static_cast<std::size_t>(i)]);
      return y;
    }
  }
  return x;
}

Vector GroupElement::apply_inverse(const Vector& x) const {
  check_dim(dim_, x.size());
  switch (kind_) {
    case GroupKind::Orthogonal: return mat_.transpose() * x;
    case GroupKind::GeneralLinear: return inv_ * x;
    case GroupKind::SignFlip: return signs_.cwiseProduct(x);
    case GroupKind::Permutation: {
      Vector y(dim_);
      for (int i = 0; i < dim_; ++i) y(perm_[static_cast<std::size_t>(i)]) = x(i);
      return y;
    }
  }
  return x;
}

Matrix GroupElement::apply_columns(const Matrix& x) const {
  check_dim(dim_, x.rows());
  switch (kind_) {
    case GroupKind::Orthogonal:
    case GroupKind::GeneralLinear: return mat_ * x;
    case GroupKind::SignFlip: return signs_.asDiagonal() * x;
    case GroupKind::Permutation: {
      Matrix y(x.rows(), x.cols());
      for (int i = 0; i < dim_; ++i) y.row(i) = x.row(perm_[static_cast<std::size_t>(i)]);
      return y;
    }
  }
  return x;
}

Matrix GroupElement::apply_inverse_columns(const Matrix& x) const {
  return inverse().apply_columns(x);
}

GroupElement GroupElement::inverse() const {
  GroupElement g = *this;
  switch (kind_) {
    case GroupKind::Orthogonal: g.mat_ = mat_.transpose(); break;
    case GroupKind::GeneralLinear: std::swap(g.mat_, g.inv_); break;
    case GroupKind::SignFlip: break;
    case GroupKind::Permutation:
      for (int i = 0; i < dim_; ++i) g.perm_[static_cast<std::size_t>(perm_[static_cast<std::size_t>(i)])] = i;
      break;
  }
  return g;
}

Matrix GroupElement::matrix() const {
  switch (kind_) {
    case GroupKind::Orthogonal:
    case GroupKind::GeneralLinear: return mat_;
    case GroupKind::SignFlip: return signs_.asDiagonal();
    case GroupKind::Permutation: {
      Matrix p = Matrix::Zero(dim_, dim_);
      for (int i = 0; i < dim_; ++i) p(i, perm_[static_cast<std::size_t>(i)]) = 1.0;
      return p;
    }
  }
  return {};
}

Matrix GroupElement::inverse_matrix() const { return inverse().matrix(); }

GroupElement compose(const GroupElement& a, const GroupElement& b) {
  if (a.dim() != b.dim()) throw DimensionError("composing group elements of different dimension");
  if (a.kind() == GroupKind::Permutation && b.kind() == GroupKind::Permutation) {
    std::vector<int> p(static_cast<std::size_t>(a.dim()));
    for (std::size_t i = 0; i < p.size(); ++i)
      p[i] = b.perm()[static_cast<std::size_t>(a.perm()[i])];
    return GroupElement::permutation(std::move(p));
  }
  if (a.kind() == GroupKind::SignFlip && b.kind() == GroupKind::SignFlip)
    return GroupElement::sign_flip(a.signs().cwiseProduct(b.signs()));
  Matrix m = a.matrix() * b.matrix();
  if (a.kind() == GroupKind::GeneralLinear || b.kind() == GroupKind::GeneralLinear)
    return GroupElement::general_linear(std::move(m), a.condition_bound() * b.condition_bound());
  return GroupElement::orthogonal(std::move(m));
}

GroupElement haar_orthogonal(int d, RngStream& rng) {
  if (d < 1) throw PreconditionError("haar_orthogonal requires d >= 1");
  const Matrix z = gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return GroupElement::orthogonal(std::move(q));
}

GroupElement uniform_permutation(int d, RngStream& rng) {
  std::vector<int> p(static_cast<std::size_t>(d));
  std::iota(p.begin(), p.end(), 0);
  for (int i = d - 1; i > 0; --i)
    std::swap(p[static_cast<std::size_t>(i)], p[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return GroupElement::permutation(std::move(p));
}

GroupElement uniform_sign_flip(int d, RngStream& rng) {
  Vector s(d);
  for (int i = 0; i < d; ++i) s(i) = rng.sign();
  return GroupElement::sign_flip(std::move(s));
}

GroupElement random_general_linear(int d, double cond_bound, RngStream& rng) {
  if (!(cond_bound > 1.0)) throw PreconditionError("condition bound must exceed 1");
  const Matrix u = haar_orthogonal(d, rng).matrix();
  const Matrix v = haar_orthogonal(d, rng).matrix();
  Vector s(d);
  const double top = 0.999 * std::log(cond_bound);
  for (int i = 0; i < d; ++i) s(i) = std::exp(rng.uniform() * top);
  return GroupElement::general_linear(u * s.asDiagonal() * v.transpose(), cond_bound);
}

GroupElement sample_group(GroupKind kind, int d, RngStream& rng) {
  switch (kind) {
    case GroupKind::Orthogonal: return haar_orthogonal(d, rng);
    case GroupKind::Permutation: return uniform_permutation(d, rng);
    case GroupKind::SignFlip: return uniform_sign_flip(d, rng);
    case GroupKind::GeneralLinear: return random_general_linear(d, 10.0, rng);
  }
  return GroupElement::identity(d);
}

Matrix skew_exp_matrix(const Matrix& s) {
  require_square(s, "skew_exp");
  require_finite(s, "skew_exp");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if (skew_defect(s) > 1e-12 * scale)
    throw PreconditionError("skew_exp: input is not skew-symmetric");
  const Eigen::Index d = s.rows();
  const double norm1 = s.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix a = s / std::ldexp(1.0, squarings);
  Matrix sum = Matrix::Identity(d, d);
  Matrix term = Matrix::Identity(d, d);
  for (int k = 1; k < 60; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-16 * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

GroupElement skew_exp(const Matrix& s) { return GroupElement::orthogonal(skew_exp_matrix(s)); }

}  // namespace eqlab
