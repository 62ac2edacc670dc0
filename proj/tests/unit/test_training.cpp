#include <cmath>

#include "doctest.h"
#include "eqlab/core/error.hpp"
#include "eqlab/core/sym_projector.hpp"
#include "eqlab/tasks/task.hpp"
#include "eqlab/training/erm.hpp"
#include "eqlab/training/iterative.hpp"
#include "eqlab/training/kernel.hpp"
#include "eqlab/training/learner.hpp"

using namespace eqlab;

namespace {
const Architecture kLinear4 = FCShape{{4, 1}, Activation::Identity};
}

TEST_CASE("gd one step on a linear model") {
  RngStream r(1);
  const Matrix x = gaussian_matrix(4, 9, r);
  const Vector y = gaussian_vector(9, r);
  const Vector w0 = gaussian_vector(4, r);
  const double eta = 0.01;
  const TrainResult res = train_from(kLinear4, w0, UpdateRule::gd(eta, 1), LabeledSet(x, y), Loss::Squared, true);
  const Vector expect = w0 - 2 * eta * x * (x.transpose() * w0 - y);
  CHECK((res.theta - expect).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(res.trace.losses.size() == 2);
  CHECK(res.trace.snapshots.size() == 2);
  CHECK(res.predictor.mode() == DecisionMode::Raw);
}

TEST_CASE("newton solves a realizable least-squares problem in one step") {
  RngStream r(2);
  const Matrix x = gaussian_matrix(4, 10, r);
  const Vector wstar = gaussian_vector(4, r);
  const LabeledSet data(x, x.transpose() * wstar);
  const TrainResult res =
      train_from(kLinear4, gaussian_vector(4, r), UpdateRule::newton(1.0, 1, 0.0), data, Loss::Squared);
  CHECK(res.trace.losses.back() <= 1e-18);
  CHECK(res.max_condition > 1.0);
}

TEST_CASE("texture: second-layer GD on a k=2 CNN fits all points") {
  const int d = 10;
  const LabeledSet all = texture_task(d).enumerate();
  const CNNGeometry geo{d, d, 1, 2, Pooling::SumOfSquares};
  // Rademacher filter entries keep |2 w0 w1| bounded away from zero.
  InitSpec init = InitSpec::symmetric("rademacher", 0.5);
  init.block_scales = {1.0, 0.0, 0.0};
  UpdateRule rule = UpdateRule::gd(0.1, 500);
  rule.trainable = param_block(geo, 1);
  rule.trainable->end = num_params(geo);  // head and bias
  int fits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream r(seed);
    const TrainResult res = run_iterative(geo, init, rule, all, r, Loss::Logistic);
    CHECK(res.theta.head(2) == res.theta0.head(2));  // filter frozen
    fits += sign_error(res.predictor, all.points, all.labels) == 0.0;
  }
  CHECK(fits == 20);
}

TEST_CASE("run_iterative is bit-reproducible") {
  RngStream data_rng(3);
  const LabeledSet data = quadratic_split_task(6).sample(20, data_rng);
  const Architecture arch = FCShape{{6, 4, 1}, Activation::Quadratic};
  for (UpdateRule rule : {UpdateRule::gd(0.01, 20), UpdateRule::adam(0.01, 20), UpdateRule::adagrad(0.05, 20),
                          UpdateRule::momentum(0.01, 0.9, 20), UpdateRule::lp_reg(0.01, 1.0, 0.1, 20)}) {
    RngStream a(4), b(4);
    const TrainResult ra = run_iterative(arch, InitSpec::gaussian(0.5), rule, data, a, Loss::Logistic, true);
    const TrainResult rb = run_iterative(arch, InitSpec::gaussian(0.5), rule, data, b, Loss::Logistic, true);
    REQUIRE(ra.trace.snapshots.size() == 21);
    for (std::size_t t = 0; t < ra.trace.snapshots.size(); ++t) CHECK(ra.trace.snapshots[t] == rb.trace.snapshots[t]);
    CHECK(ra.trace.losses.back() < ra.trace.losses.front());
  }
}

TEST_CASE("update rule arithmetic") {
  // A single-parameter quadratic makes each rule checkable by hand.
  const Architecture arch = FCShape{{1, 1}, Activation::Identity};
  Matrix x(1, 1);
  x << 1.0;
  Vector y(1);
  y << 0.0;
  const LabeledSet data(x, y);  // L(w) = w², grad 2w
  Vector w0(1);
  w0 << 1.0;
  CHECK(train_from(arch, w0, UpdateRule::gd(0.1, 1), data, Loss::Squared).theta(0) == doctest::Approx(0.8));
  // Momentum: w1 = 0.8, w2 = w1 - 0.1·2·w1 + 0.5 (w1 - w0) = 0.64 - 0.1.
  CHECK(train_from(arch, w0, UpdateRule::momentum(0.1, 0.5, 2), data, Loss::Squared).theta(0) ==
        doctest::Approx(0.54));
  // Adam's first step moves by eta·sign(g) (up to eps).
  CHECK(train_from(arch, w0, UpdateRule::adam(0.1, 1), data, Loss::Squared).theta(0) == doctest::Approx(0.9));
  CHECK(train_from(arch, w0, UpdateRule::adagrad(0.1, 1), data, Loss::Squared).theta(0) == doctest::Approx(0.9));
  // l1: grad 2w + lambda sign(w).
  CHECK(train_from(arch, w0, UpdateRule::lp_reg(0.1, 1.0, 0.5, 1), data, Loss::Squared).theta(0) ==
        doctest::Approx(0.75));
  CHECK(train_from(arch, w0, UpdateRule::lp_reg(0.1, 2.0, 0.5, 1), data, Loss::Squared).theta(0) ==
        doctest::Approx(0.7));
  CHECK(train_from(arch, w0, UpdateRule::newton(1.0, 1, 0.0), data, Loss::Squared).theta(0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(UpdateRule::momentum(0.1, 1.0, 1).validate(), PreconditionError);
  CHECK_THROWS_AS(UpdateRule::gd(0.0, 1).validate(), PreconditionError);
  CHECK_THROWS_AS(UpdateRule::gd(0.1, 0).validate(), PreconditionError);
}

TEST_CASE("divergence and singular Hessian are reported") {
  RngStream r(5);
  const Matrix x = gaussian_matrix(4, 6, r, 10.0);
  const LabeledSet data(x, gaussian_vector(6, r));
  try {
    train_from(kLinear4, gaussian_vector(4, r), UpdateRule::gd(10.0, 500), data, Loss::Squared);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() > 0);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
  // Two points in R^4 give a rank-2 Hessian.
  const LabeledSet small(gaussian_matrix(4, 2, r), gaussian_vector(2, r));
  CHECK_THROWS_AS(train_from(kLinear4, Vector::Zero(4), UpdateRule::newton(1.0, 1, 0.0), small, Loss::Squared),
                  SingularHessianError);
  CHECK_THROWS_AS(train_from(kLinear4, Vector::Zero(4), UpdateRule::gd(0.1, 1), LabeledSet(Matrix(4, 0), Vector(0)),
                             Loss::Squared),
                  PreconditionError);
}

TEST_CASE("init kinds") {
  const Architecture arch = FCShape{{5, 3, 1}, Activation::Quadratic};
  RngStream r(6);
  const Vector z = sample_init(arch, InitSpec::zero_first_layer(1.0), r);
  CHECK(z.head(15).cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.tail(3).cwiseAbs().minCoeff() > 0.0);
  const Vector s = sample_init(arch, InitSpec::symmetric("rademacher", 0.5), r);
  CHECK((s.cwiseAbs().array() == 0.5).all());
  InitSpec aniso = InitSpec::gaussian(1.0);
  aniso.input_scales = Vector::Ones(5);
  aniso.input_scales(0) = 0.0;
  const Vector a = sample_init(arch, aniso, r);
  for (int i = 0; i < 3; ++i) CHECK(a(i * 5) == 0.0);
  CHECK_THROWS_AS(sample_init(arch, InitSpec::gaussian(0.0), r), PreconditionError);
  CHECK_THROWS_AS(InitSpec::symmetric("cauchy", 1.0), PreconditionError);
}

TEST_CASE("GD with halving is monotone on a convex second-layer problem") {
  RngStream r(7);
  const CNNGeometry geo{8, 4, 2, 1, Pooling::SumOfSquares};
  const LabeledSet data = quadratic_split_task(8).sample(40, r);
  Vector theta0 = sample_init(geo, InitSpec::gaussian(1.0), r);
  UpdateRule rule = UpdateRule::gd(5.0, 200);
  rule.trainable = ParamRange{1, 4};
  const MonotoneGdResult res = run_gd_monotone(geo, theta0, rule, data, Loss::Logistic);
  CHECK(res.halvings > 0);
  for (std::size_t t = 1; t < res.result.trace.losses.size(); ++t)
    CHECK(res.result.trace.losses[t] <= res.result.trace.losses[t - 1]);
}

TEST_CASE("erm_cnn_sign examples") {
  RngStream r(8);
  Vector alpha(2);
  alpha << 1.0, -1.0;
  const LabeledSet quad = alpha_quadratic_task(alpha).sample(50, r);
  CHECK(erm_cnn_sign(FeatureMap::PerCoordinateSquares, quad).train_error == 0.0);

  const Task tex = texture_task(20);
  const LabeledSet all = tex.enumerate();
  int done = 0;
  while (done < 20) {
    const LabeledSet s = tex.sample(12, r);
    if ((s.labels.array() > 0).all() || (s.labels.array() < 0).all()) continue;
    const ErmResult e = erm_cnn_sign(FeatureMap::Conv2SquareSums, s);
    CHECK(e.train_error == 0.0);
    CHECK(sign_error(e.predictor, all.points, all.labels) == 0.0);
    CHECK_FALSE(e.predictor.flagged);
    ++done;
  }

  // One-class input: constant predictor of that class, flagged.
  Matrix only_s(20, 3);
  for (int i = 0; i < 3; ++i) only_s.col(i) = all.points.col(i);
  const ErmResult deg = erm_cnn_sign(FeatureMap::Conv2SquareSums, LabeledSet(only_s, Vector::Ones(3)));
  CHECK(deg.degenerate);
  CHECK(deg.predictor.flagged);
  CHECK((deg.predictor.predict_batch(all.points).array() == 1.0).all());

  // Block sums fit the split task; the linear map fits one-hot signs.
  const LabeledSet split = quadratic_split_task(8).sample(60, r);
  CHECK(erm_cnn_sign(FeatureMap::BlockSquareSums, split).train_error == 0.0);
  const LabeledSet hot = onehot_task(10).sample(15, r);
  CHECK(erm_cnn_sign(FeatureMap::PerCoordinateLinear, hot).train_error == 0.0);
}

TEST_CASE("erm_cnn_sign flags non-separable data") {
  Matrix x(2, 2);
  x << 1, 1, 0, 0;
  Vector y(2);
  y << 1, -1;
  const ErmResult e = erm_cnn_sign(FeatureMap::PerCoordinateSquares, LabeledSet(x, y));
  CHECK(e.train_error == 0.5);
  CHECK(e.predictor.flagged);
}

TEST_CASE("erm_cnn_regression examples") {
  RngStream r(9);
  const int d = 5;
  const Vector alpha = gaussian_vector(d, r);
  const Task task = quadratic_regression_task(Matrix(alpha.asDiagonal()));
  const LabeledSet train = task.sample(d + 1, r);
  const RegressionFit fit = erm_cnn_regression(train);
  CHECK((fit.coef.head(d) - alpha).cwiseAbs().maxCoeff() <= 1e-8);
  const LabeledSet test = task.sample(1000, r);
  CHECK(mean_squared_error(fit.predictor, test.points, test.labels) <= 1e-10);

  const LabeledSet one = task.sample(1, r);
  const RegressionFit f1 = erm_cnn_regression(one);
  CHECK(std::abs(f1.predictor.predict(one.point(0)) - one.labels(0)) <= 1e-10);
  CHECK_THROWS_AS(erm_cnn_regression(task.sample(0, r)), PreconditionError);
}

TEST_CASE("erm_cnn_regression residual for a non-diagonal target") {
  RngStream r(10);
  const int d = 4;
  const Matrix m = gaussian_matrix(d, d, r);
  const Task task = quadratic_regression_task(m);
  const RegressionFit fit = erm_cnn_regression(task.sample(20000, r));
  const LabeledSet test = task.sample(200000, r);
  Matrix off = 0.5 * (m + m.transpose());
  off.diagonal().setZero();
  // The diagonal-quadratic class cannot express x_i x_j, so the residual is xᵀ O x.
  const double expect = 2.0 * off.squaredNorm();
  CHECK(mean_squared_error(fit.predictor, test.points, test.labels) == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("kernel_regression_sign examples") {
  RngStream r(11);
  Matrix x1(3, 1);
  x1 << 1.0, 0.5, -0.2;
  const Predictor p1 = kernel_regression_sign(linear_kernel(), LabeledSet(x1, Vector::Ones(1)));
  for (int i = 0; i < 50; ++i) {
    const Vector q = gaussian_vector(3, r);
    if (q.dot(x1.col(0)) > 0) CHECK(p1.predict(q) == 1.0);
  }
  Matrix x2(2, 2);
  x2 << 1.0, -1.0, 0.2, 0.3;
  Vector y2(2);
  y2 << 1.0, -1.0;
  const Predictor p2 = kernel_regression_sign(linear_kernel(), LabeledSet(x2, y2));
  CHECK(p2.predict(x2.col(0)) == 1.0);
  CHECK(p2.predict(x2.col(1)) == -1.0);

  // Rotation-invariant kernel: scores agree on (g data, g x) and (data, x).
  const LabeledSet data(gaussian_matrix(5, 8, r), Vector::Ones(8) - 2.0 * (gaussian_vector(8, r).array() > 0).cast<double>().matrix());
  const Predictor base = kernel_regression_sign(quadratic_kernel(), data);
  for (int rep = 0; rep < 5; ++rep) {
    const GroupElement g = haar_orthogonal(5, r);
    const Predictor moved = kernel_regression_sign(quadratic_kernel(), data.transformed(g));
    const Matrix q = gaussian_matrix(5, 30, r);
    const Vector a = base.score_batch(q), b = moved.score_batch(g.apply_columns(q));
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff()));
  }

  const Kernel skewed = [](const Vector& u, const Vector& v) { return u.dot(v) + 0.1 * u(0); };
  CHECK_THROWS_AS(kernel_regression_sign(skewed, data), PreconditionError);
  const Kernel negative = [](const Vector& u, const Vector& v) { return -u.dot(v); };
  CHECK_THROWS_AS(kernel_regression_sign(negative, data), PreconditionError);
}

TEST_CASE("linear kernel regression equals minimum-norm interpolation") {
  RngStream r(12);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix x = gaussian_matrix(6, 4, r);
    const Vector y = (gaussian_vector(4, r).array() >= 0).cast<double>() * 2.0 - 1.0;
    const Predictor p = kernel_regression_sign(linear_kernel(), LabeledSet(x, y));
    const Vector w = x.transpose().completeOrthogonalDecomposition().solve(y);
    const Matrix q = gaussian_matrix(6, 100, r);
    const Vector direct = q.transpose() * w;
    CHECK((p.score_batch(q) - direct).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("quadratic-form covariance oracle behind the Bayes regressor") {
  // Cov(uᵀMu, vᵀMv) for entrywise standard Gaussian M, estimated directly.
  RngStream r(13);
  for (int d = 2; d <= 4; ++d) {
    const Vector u = gaussian_vector(d, r), v = gaussian_vector(d, r);
    const int n = 200000;
    double su = 0, sv = 0, suv = 0;
    std::vector<double> prods;
    prods.reserve(n);
    for (int i = 0; i < n; ++i) {
      const Matrix m = gaussian_matrix(d, d, r);
      const double a = u.dot(m * u), b = v.dot(m * v);
      su += a;
      sv += b;
      suv += a * b;
      prods.push_back(a * b);
    }
    const double cov = suv / n - (su / n) * (sv / n);
    double var = 0;
    for (double p : prods) var += (p - suv / n) * (p - suv / n);
    const double se = std::sqrt(var / n / n);
    const double expect = std::pow(u.dot(v), 2);
    CHECK(std::abs(cov - expect) <= 4 * se + 1e-3);
  }
}

TEST_CASE("bayes_quadratic_regressor examples") {
  RngStream r(14);
  const Matrix empty(5, 0);
  const BayesRegressor prior = bayes_quadratic_regressor(LabeledSet(empty, Vector(0)));
  const Vector x = gaussian_vector(5, r);
  CHECK(prior.mean.predict(x) == 0.0);
  CHECK(prior.variance(x) == doctest::Approx(std::pow(x.squaredNorm(), 2)).epsilon(1e-12));

  for (int rep = 0; rep < 10; ++rep) {
    const Matrix m = gaussian_matrix(5, 5, r);
    const LabeledSet data = quadratic_regression_task(m).sample(6, r);
    const BayesRegressor b = bayes_quadratic_regressor(data);
    const SymProjector proj = sym_projector(data.points);
    for (int i = 0; i < 20; ++i) {
      const Vector q = gaussian_vector(5, r);
      CHECK(std::abs(b.variance(q) - proj.complement_norm_sq(q)) <= 1e-6 * std::max(1.0, proj.complement_norm_sq(q)));
    }
    // The posterior mean interpolates the training labels.
    CHECK((b.mean.score_batch(data.points) - data.labels).cwiseAbs().maxCoeff() <= 1e-8 * data.labels.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("bayes expected loss respects the regression floor at d=6") {
  RngStream r(15);
  const int d = 6;
  for (int n : {0, 6, 12, 18}) {
    double s = 0, s2 = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
      const Matrix design = gaussian_matrix(d, n, r);
      const BayesQuadratic model(design);
      const Matrix m = gaussian_matrix(d, d, r);
      Vector y(n);
      for (int i = 0; i < n; ++i) y(i) = design.col(i).dot(m * design.col(i));
      const Vector alpha = model.weights(y);
      const Matrix q = gaussian_matrix(d, 20, r);
      const Vector pred = model.mean(alpha, q);
      double loss = 0;
      for (int i = 0; i < 20; ++i) loss += std::pow(pred(i) - q.col(i).dot(m * q.col(i)), 2);
      loss /= 20;
      s += loss;
      s2 += loss * loss;
    }
    const double mean = s / trials, se = std::sqrt((s2 / trials - mean * mean) / trials);
    CHECK(mean >= d * (d + 1) - 2 * n - 3 * se);
  }
}

TEST_CASE("bayes conditional variance is non-increasing in n") {
  RngStream r(16);
  const Matrix pts = gaussian_matrix(4, 14, r);
  const Matrix probes = gaussian_matrix(4, 25, r);
  Vector prev = BayesQuadratic(pts.leftCols(0)).variance(probes);
  for (int n = 1; n <= 14; ++n) {
    const Vector cur = BayesQuadratic(pts.leftCols(n)).variance(probes);
    CHECK((cur.array() <= prev.array() + 1e-8 * std::max(1.0, prev.cwiseAbs().maxCoeff())).all());
    prev = cur;
  }
  CHECK(prev.cwiseAbs().maxCoeff() <= 1e-6);  // saturated at d(d+1)/2 = 10 samples
}

TEST_CASE("symmetrized learners") {
  RngStream r(17);
  const Learner erm{"erm-conv2", [](const LabeledSet& s, RngStream&) {
                      return erm_cnn_sign(FeatureMap::Conv2SquareSums, s).predictor;
                    }};
  const Learner noop = symmetrized(erm, GroupSampler::identity());
  const Task tex = texture_task(20);
  const LabeledSet all = tex.enumerate();
  const LabeledSet train = tex.sample(12, r);
  RngStream a(1), b(1);
  CHECK(noop.fit(train, a).score_batch(all.points) == erm.fit(train, b).score_batch(all.points));

  // Permutation symmetrization inherits the lower bound at n = d/10.
  const int d = 50;
  const Task big = texture_task(d);
  const LabeledSet everything = big.enumerate();
  const Learner sym = symmetrized(erm, GroupSampler::permutation());
  double total = 0;
  for (int t = 0; t < 50; ++t) {
    RngStream tr(1000 + t);
    const LabeledSet s = big.sample(d / 10, tr);
    total += sign_error(sym.fit(s, tr), everything.points, everything.labels);
  }
  CHECK(total / 50 >= 0.2);
}
