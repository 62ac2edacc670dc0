#pragma once

#include <string>
#include <vector>

#include "eqlab/core/linalg.hpp"

namespace eqlab {

enum class GroupKind { Orthogonal, Permutation, SignFlip, GeneralLinear };

std::string to_string(GroupKind k);
GroupKind parse_group_kind(const std::string& s);

// Invertible transform of R^d. Permutations follow y[i] = x[perm[i]].
class GroupElement {
 public:
  static GroupElement identity(int d);
  static GroupElement orthogonal(Matrix q, double tol = 1e-10);
  static GroupElement permutation(std::vector<int> perm);
  static GroupElement sign_flip(Vector signs);
  // Rejects matrices whose 2-norm condition number exceeds cond_bound.
  static GroupElement general_linear(Matrix a, double cond_bound);

  GroupKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<int>& perm() const { return perm_; }
  const Vector& signs() const { return signs_; }
  double condition_bound() const { return cond_bound_; }

  Vector apply(const Vector& x) const;
  Vector apply_inverse(const Vector& x) const;
  // Column-wise action on a d×n matrix of points.
  Matrix apply_columns(const Matrix& x) const;
  Matrix apply_inverse_columns(const Matrix& x) const;

  GroupElement inverse() const;
  Matrix matrix() const;
  Matrix inverse_matrix() const;

 private:
  GroupElement() = default;

  GroupKind kind_ = GroupKind::Permutation;
  int dim_ = 0;
  Matrix mat_;      // orthogonal / general-linear forward map
  Matrix inv_;      // general-linear inverse
  std::vector<int> perm_;
  Vector signs_;
  double cond_bound_ = 1.0;
};

// a∘b, i.e. x ↦ a(b(x)).
GroupElement compose(const GroupElement& a, const GroupElement& b);

GroupElement haar_orthogonal(int d, RngStream& rng);
GroupElement uniform_permutation(int d, RngStream& rng);
GroupElement uniform_sign_flip(int d, RngStream& rng);
// U·diag(s)·Vᵀ with Haar U, V and log-uniform singular values in [1, cond_bound).
GroupElement random_general_linear(int d, double cond_bound, RngStream& rng);
// Draws from the named family; general-linear uses condition bound 10.
GroupElement sample_group(GroupKind kind, int d, RngStream& rng);

// Matrix exponential of a skew-symmetric matrix by scaling and squaring.
GroupElement skew_exp(const Matrix& s);
Matrix skew_exp_matrix(const Matrix& s);

}  // namespace eqlab
