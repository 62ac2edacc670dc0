#include "eqlab/training/kernel.hpp"

#include <cmath>
#include <memory>

#include "eqlab/core/error.hpp"

namespace eqlab {

Kernel linear_kernel() {
  return [](const Vector& u, const Vector& v) { return u.dot(v); };
}

Kernel quadratic_kernel() {
  return [](const Vector& u, const Vector& v) {
    const double t = u.dot(v);
    return t * t;
  };
}

Matrix gram_matrix(const Kernel& k, const Matrix& x) {
  const Eigen::Index n = x.cols();
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = k(x.col(i), x.col(j));
  return g;
}

Predictor kernel_regression_sign(const Kernel& k, const LabeledSet& data) {
  if (data.empty()) throw PreconditionError("kernel regression requires at least one sample");
  const Matrix g = gram_matrix(k, data.points);
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw PreconditionError("kernel is not symmetric on the training points");
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, top))
    throw PreconditionError("Gram matrix is not positive semidefinite");
  const Vector alpha = symmetric_pinv(g, 1e-10) * data.labels;
  const Matrix x = data.points;
  return Predictor(
      [k, x, alpha](const Matrix& q) {
        Vector s(q.cols());
        for (Eigen::Index c = 0; c < q.cols(); ++c) {
          double v = 0.0;
          for (Eigen::Index i = 0; i < x.cols(); ++i) v += k(q.col(c), x.col(i)) * alpha(i);
          s(c) = v;
        }
        return s;
      },
      DecisionMode::Sign);
}

BayesQuadratic::BayesQuadratic(const Matrix& design) : x_(design) {
  const Matrix ip = x_.transpose() * x_;
  gpinv_ = symmetric_pinv(ip.cwiseProduct(ip), 1e-10);
}

Vector BayesQuadratic::weights(const Vector& y) const {
  if (y.size() != x_.cols()) throw DimensionError("BayesQuadratic: label count mismatch");
  return gpinv_ * y;
}

Vector BayesQuadratic::mean(const Vector& alpha, const Matrix& points) const {
  if (x_.cols() == 0) return Vector::Zero(points.cols());
  Matrix k = points.transpose() * x_;
  k = k.cwiseProduct(k);
  return k * alpha;
}

Vector BayesQuadratic::variance(const Matrix& points) const {
  const Vector prior = points.colwise().squaredNorm().transpose().array().square();
  if (x_.cols() == 0) return prior;
  Matrix k = points.transpose() * x_;
  k = k.cwiseProduct(k);
  const Vector explained = (k * gpinv_).cwiseProduct(k).rowwise().sum();
  return prior - explained;
}

BayesRegressor bayes_quadratic_regressor(const LabeledSet& data) {
  auto model = std::make_shared<BayesQuadratic>(data.points);
  const Vector alpha = model->weights(data.labels);
  BayesRegressor out;
  out.mean = Predictor([model, alpha](const Matrix& x) { return model->mean(alpha, x); }, DecisionMode::Raw);
  out.variance = [model](const Vector& x) { return model->variance(x)(0); };
  return out;
}

}  // namespace eqlab
