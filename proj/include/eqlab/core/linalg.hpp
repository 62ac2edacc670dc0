#pragma once

#include <Eigen/Dense>
#include <string>

#include "eqlab/core/rng.hpp"

namespace eqlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng, double sd = 1.0);
Vector gaussian_vector(Eigen::Index n, RngStream& rng, double sd = 1.0);

// Throws PreconditionError naming `what` if any entry is NaN or infinite.
void require_finite(const Matrix& m, const std::string& what);
void require_square(const Matrix& m, const std::string& what);

// ‖QᵀQ − I‖_max.
double orthogonality_defect(const Matrix& q);
double skew_defect(const Matrix& s);  // ‖S + Sᵀ‖_max

// Moore-Penrose inverse of a symmetric matrix; eigenvalues below
// rel_cutoff·max|λ| are treated as zero.
Matrix symmetric_pinv(const Matrix& a, double rel_cutoff = 1e-10);

}  // namespace eqlab
