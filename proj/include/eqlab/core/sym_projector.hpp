#pragma once

#include "eqlab/core/linalg.hpp"

namespace eqlab {

// Isometric coordinates for symmetric matrices: diagonal entries followed by
// √2·A_ij for i<j, so that the dot product equals the Frobenius product.
Vector svec(const Matrix& a);
Matrix smat(const Vector& v, int d);
inline int sym_dim(int d) { return d * (d + 1) / 2; }

// Orthogonal projection, in the Frobenius geometry of Sym(d), onto the
// complement of span{x_i x_iᵀ}.
class SymProjector {
 public:
  explicit SymProjector(int d, double rank_tol = 1e-10);

  // Adds x xᵀ to the spanning set; returns false if it was already in the span.
  bool add(const Vector& x);

  int dim() const { return d_; }
  int rank() const { return rank_; }
  int complement_rank() const { return sym_dim(d_) - rank_; }
  // Orthonormal basis of the span, in svec coordinates (one column per element).
  Matrix basis() const { return basis_.leftCols(rank_); }

  // Π(A), applied to the symmetric part of A.
  Matrix project(const Matrix& a) const;
  // Component of sym(A) inside the span.
  Matrix span_component(const Matrix& a) const;
  // ‖Π(x xᵀ)‖_F², computed from the explicit residual.
  double complement_norm_sq(const Vector& x) const;

 private:
  Vector residual(Vector v) const;

  int d_;
  double tol_;
  int rank_ = 0;
  Matrix basis_;
};

// Builds the projector from the columns of a d×n matrix.
SymProjector sym_projector(const Matrix& points, double rank_tol = 1e-10);

}  // namespace eqlab
