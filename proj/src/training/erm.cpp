#include "eqlab/training/erm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eqlab/core/error.hpp"

namespace eqlab {

std::string to_string(FeatureMap f) {
  switch (f) {
    case FeatureMap::PerCoordinateSquares: return "per-coordinate-squares";
    case FeatureMap::BlockSquareSums: return "block-square-sums";
    case FeatureMap::Conv2SquareSums: return "conv2-square-sums";
    case FeatureMap::PerCoordinateLinear: return "per-coordinate-linear";
  }
  return "?";
}

FeatureMap parse_feature_map(const std::string& s) {
  if (s == "per-coordinate-squares" || s == "squares") return FeatureMap::PerCoordinateSquares;
  if (s == "block-square-sums" || s == "blocks") return FeatureMap::BlockSquareSums;
  if (s == "conv2-square-sums" || s == "conv2") return FeatureMap::Conv2SquareSums;
  if (s == "per-coordinate-linear" || s == "linear") return FeatureMap::PerCoordinateLinear;
  throw PreconditionError("unknown feature map '" + s + "'");
}

namespace {

// Σ x_i² and Σ x_i x_{i-1} (cyclic) per column.
void conv2_parts(const Matrix& x, Vector& sq, Vector& lag) {
  const Eigen::Index d = x.rows();
  sq = x.colwise().squaredNorm().transpose();
  lag = Vector::Zero(x.cols());
  for (Eigen::Index i = 0; i < d; ++i) lag += x.row(i).cwiseProduct(x.row((i + d - 1) % d)).transpose();
}

double training_error(const Matrix& phi1, const Vector& y, const Vector& theta) {
  const Vector s = phi1.transpose() * theta;
  int wrong = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) wrong += sign_label(s(i)) != y(i);
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

// Minimizes Σ log(1+exp(-y θᵀφ)) + (mu/2)‖θ‖² by damped Newton.
Vector logistic_newton(const Matrix& phi1, const Vector& y, double mu, Vector theta) {
  const Eigen::Index m = phi1.rows();
  const auto objective = [&](const Vector& th) {
    const Vector z = (phi1.transpose() * th).cwiseProduct(y);
    double v = 0.5 * mu * th.squaredNorm();
    for (Eigen::Index i = 0; i < z.size(); ++i) v += z(i) > 0 ? std::log1p(std::exp(-z(i))) : -z(i) + std::log1p(std::exp(z(i)));
    return v;
  };
  double f = objective(theta);
  for (int it = 0; it < 100; ++it) {
    const Vector z = (phi1.transpose() * theta).cwiseProduct(y);
    Vector p(z.size()), w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(z(i)));  // sigmoid(-z)
      p(i) = -y(i) * s;
      w(i) = s * (1.0 - s);
    }
    const Vector g = phi1 * p + mu * theta;
    Matrix h = phi1 * w.asDiagonal() * phi1.transpose();
    h.diagonal().array() += mu;
    const Vector step = h.ldlt().solve(g);
    if (!step.allFinite()) break;
    double t = 1.0;
    Vector next = theta - step;
    double fn = objective(next);
    while (fn > f && t > 1e-12) {
      t *= 0.5;
      next = theta - t * step;
      fn = objective(next);
    }
    if (fn > f) break;
    const double decrease = f - fn;
    theta = next;
    f = fn;
    if (g.norm() <= 1e-10 * std::max(1.0, static_cast<double>(m)) || decrease <= 1e-15 * std::max(1.0, f)) break;
  }
  return theta;
}

Vector perceptron(const Matrix& phi1, const Vector& y, Vector theta, int epochs, double* best_err) {
  Vector best = theta;
  double best_e = training_error(phi1, y, theta);
  for (int e = 0; e < epochs && best_e > 0; ++e) {
    bool changed = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (sign_label(phi1.col(i).dot(theta)) != y(i) || phi1.col(i).dot(theta) == 0.0) {
        theta += y(i) * phi1.col(i);
        changed = true;
      }
    }
    const double err = training_error(phi1, y, theta);
    if (err < best_e) {
      best_e = err;
      best = theta;
    }
    if (!changed) break;
  }
  *best_err = best_e;
  return best;
}

struct Threshold {
  double errors = 0;
  double margin = 0;
  double orient = 1;
  double cut = 0;
};

// Best 1-D rule sign(orient·(v - cut)); ties on errors broken by the larger gap.
Threshold best_threshold(const Vector& v, const Vector& y) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v(a) < v(b); });
  double pos_total = 0;
  for (Eigen::Index i = 0; i < n; ++i) pos_total += y(i) > 0;
  const double neg_total = static_cast<double>(n) - pos_total;
  Threshold best;
  best.errors = INFINITY;
  double pos_below = 0, neg_below = 0;
  for (Eigen::Index k = 0; k <= n; ++k) {
    if (k > 0) {
      const Eigen::Index j = idx[static_cast<std::size_t>(k - 1)];
      (y(j) > 0 ? pos_below : neg_below) += 1;
    }
    const bool at_end = k == n || k == 0;
    if (!at_end && v(idx[static_cast<std::size_t>(k - 1)]) == v(idx[static_cast<std::size_t>(k)])) continue;
    double cut, gap;
    if (k == 0) {
      cut = v(idx[0]) - 1.0;
      gap = 0.0;
    } else if (k == n) {
      cut = v(idx[static_cast<std::size_t>(n - 1)]) + 1.0;
      gap = 0.0;
    } else {
      const double lo = v(idx[static_cast<std::size_t>(k - 1)]), hi = v(idx[static_cast<std::size_t>(k)]);
      cut = 0.5 * (lo + hi);
      gap = 0.5 * (hi - lo);
    }
    // orient=+1 predicts +1 above the cut; orient=-1 predicts +1 below it.
    const double err_up = pos_below + (neg_total - neg_below);
    const double err_down = neg_below + (pos_total - pos_below);
    for (const auto& [err, orient] : {std::pair{err_up, 1.0}, std::pair{err_down, -1.0}}) {
      if (err < best.errors || (err == best.errors && gap > best.margin)) best = {err, gap, orient, cut};
    }
  }
  return best;
}

Matrix with_bias(const Matrix& phi) {
  Matrix out(phi.rows() + 1, phi.cols());
  out.topRows(phi.rows()) = phi;
  out.row(phi.rows()).setOnes();
  return out;
}

}  // namespace

Matrix cnn_features(FeatureMap f, const Matrix& x, const ErmOptions& opt) {
  switch (f) {
    case FeatureMap::PerCoordinateSquares: return x.cwiseProduct(x);
    case FeatureMap::PerCoordinateLinear: return x;
    case FeatureMap::BlockSquareSums: {
      const int r = opt.blocks;
      if (r < 1 || x.rows() % r != 0) throw DimensionError("block-square-sums: d must be a multiple of the block count");
      const Eigen::Index len = x.rows() / r;
      Matrix phi(r, x.cols());
      for (int b = 0; b < r; ++b) phi.row(b) = x.middleRows(b * len, len).colwise().squaredNorm();
      return phi;
    }
    case FeatureMap::Conv2SquareSums: {
      Vector sq, lag;
      conv2_parts(x, sq, lag);
      Matrix phi(2, x.cols());
      phi.row(0) = sq.transpose();
      phi.row(1) = lag.transpose();
      return phi;
    }
  }
  return x;
}

Vector fit_linear_separator(const Matrix& phi, const Vector& y, double* train_error) {
  const Matrix phi1 = with_bias(phi);
  Vector theta = Vector::Zero(phi1.rows());
  double err = 1.0;
  for (double mu : {1e-2, 1e-4, 1e-6, 1e-8}) {
    theta = logistic_newton(phi1, y, mu, theta);
    err = training_error(phi1, y, theta);
    if (err == 0.0) break;
  }
  if (err > 0.0) {
    double perr = 1.0;
    const Vector alt = perceptron(phi1, y, theta, 2000, &perr);
    if (perr < err) {
      theta = alt;
      err = perr;
    }
  }
  if (train_error) *train_error = err;
  return theta;
}

ErmResult erm_cnn_sign(FeatureMap f, const LabeledSet& data, const ErmOptions& opt) {
  if (data.empty()) throw PreconditionError("erm_cnn_sign requires at least one sample");
  ErmResult out;
  const Vector& y = data.labels;
  const bool all_pos = (y.array() > 0).all(), all_neg = (y.array() < 0).all();
  if (all_pos || all_neg) {
    out.degenerate = true;
    out.predictor = Predictor::constant(all_pos ? 1.0 : -1.0, DecisionMode::Sign);
    out.predictor.flagged = true;
    out.predictor.note = "one-class training set";
    return out;
  }
  if (f == FeatureMap::Conv2SquareSums) {
    Vector sq, lag;
    conv2_parts(data.points, sq, lag);
    Threshold best;
    best.errors = INFINITY;
    double best_score = -INFINITY, best_mix = 0.0;
    const int grid = std::max(3, opt.angle_grid | 1);
    for (int g = 0; g < grid; ++g) {
      const double mix = -1.0 + 2.0 * g / (grid - 1);
      const Vector v = sq + mix * lag;
      const Threshold t = best_threshold(v, y);
      const double scale = 1.0 + v.cwiseAbs().maxCoeff();
      const double score = -t.errors * 1e6 + t.margin / scale;
      if (score > best_score) {
        best_score = score;
        best = t;
        best_mix = mix;
      }
    }
    out.conv_mix = best_mix;
    out.coef = Vector(2);
    out.coef << best.orient, -best.orient * best.cut;
    out.train_error = best.errors / static_cast<double>(y.size());
    const double a = best.orient, b = -best.orient * best.cut, mix = best_mix;
    out.predictor = Predictor(
        [a, b, mix](const Matrix& x) {
          Vector s, l;
          conv2_parts(x, s, l);
          return Vector((a * (s + mix * l)).array() + b);
        },
        DecisionMode::Sign);
  } else {
    const Matrix phi = cnn_features(f, data.points, opt);
    double err = 0.0;
    const Vector theta = fit_linear_separator(phi, y, &err);
    out.coef = theta;
    out.train_error = err;
    out.predictor = Predictor(
        [f, opt, theta](const Matrix& x) {
          const Matrix p = cnn_features(f, x, opt);
          return Vector((p.transpose() * theta.head(p.rows())).array() + theta(p.rows()));
        },
        DecisionMode::Sign);
  }
  if (out.train_error > 0.0) {
    out.predictor.flagged = true;
    out.predictor.note = "no zero-training-error separator found";
  }
  return out;
}

RegressionFit erm_cnn_regression(const LabeledSet& data) {
  if (data.empty()) throw PreconditionError("erm_cnn_regression requires n >= 1");
  const Matrix phi1 = with_bias(data.points.cwiseProduct(data.points));
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(phi1.transpose());
  cod.setThreshold(1e-12);
  RegressionFit out;
  out.coef = cod.solve(data.labels);
  const Vector coef = out.coef;
  out.predictor = Predictor(
      [coef](const Matrix& x) {
        const Eigen::Index d = x.rows();
        return Vector((x.cwiseProduct(x).transpose() * coef.head(d)).array() + coef(d));
      },
      DecisionMode::Raw);
  return out;
}

}  // namespace eqlab
