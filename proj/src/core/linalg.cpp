#include "eqlab/core/linalg.hpp"

#include <cmath>

#include "eqlab/core/error.hpp"

namespace eqlab {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng, double sd) {
  Matrix m(rows, cols);
  // Fill row by row so the draw order matches the row-major reading of the matrix.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = sd * rng.normal();
  return m;
}

Vector gaussian_vector(Eigen::Index n, RngStream& rng, double sd) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = sd * rng.normal();
  return v;
}

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw PreconditionError(what + ": non-finite entry");
}

void require_square(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError(what + ": expected a non-empty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

double orthogonality_defect(const Matrix& q) {
  if (q.rows() != q.cols()) return INFINITY;
  return (q.transpose() * q - Matrix::Identity(q.rows(), q.cols())).cwiseAbs().maxCoeff();
}

double skew_defect(const Matrix& s) {
  if (s.rows() != s.cols()) return INFINITY;
  if (s.size() == 0) return 0.0;
  return (s + s.transpose()).cwiseAbs().maxCoeff();
}

Matrix symmetric_pinv(const Matrix& a, double rel_cutoff) {
  if (a.size() == 0) return a;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Vector& ev = es.eigenvalues();
  const double cut = rel_cutoff * ev.cwiseAbs().maxCoeff();
  Vector inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv(i) = std::abs(ev(i)) > cut ? 1.0 / ev(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace eqlab
