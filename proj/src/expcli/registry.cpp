#include "eqlab/expcli/registry.hpp"

#include <algorithm>
#include <cmath>

#include "eqlab/core/error.hpp"
#include "eqlab/training/erm.hpp"
#include "eqlab/training/iterative.hpp"
#include "eqlab/training/kernel.hpp"

namespace eqlab {

namespace {

double or_default(double v, double def) { return v > 0.0 ? v : def; }
int or_default(int v, int def) { return v > 0 ? v : def; }

Predictor empty_fit_guard(const LabeledSet&) {
  Predictor p = Predictor::constant(1.0, DecisionMode::Sign);
  p.note = "empty training set";
  return p;
}

Learner erm_learner(const std::string& name, FeatureMap f) {
  return {name, [f](const LabeledSet& data, RngStream&) {
            if (data.empty()) return empty_fit_guard(data);
            return erm_cnn_sign(f, data).predictor;
          }};
}

enum class Opt { GD, Momentum, Adam };

Learner iterative_learner(const std::string& name, bool cnn, Opt kind, const LearnerOptions& o) {
  return {name, [=](const LabeledSet& data, RngStream& rng) {
            const int d = data.dim();
            Architecture arch;
            InitSpec init;
            if (cnn) {
              const int c = std::max(1, o.channels);
              if (d % c != 0) throw PreconditionError(name + ": input dimension must split into " + std::to_string(c) + " channels");
              arch = CNNGeometry{d, d / c, c, 1, Pooling::SumOfSquares};
              init = InitSpec::gaussian(or_default(o.sigma, 1.0));
              init.block_scales = {1.0, 0.0, 0.0};
            } else {
              arch = FCShape{{d, or_default(o.hidden, d), 1}, parse_activation(o.activation)};
              init = InitSpec::gaussian(or_default(o.sigma, 1.0 / std::sqrt(static_cast<double>(d))));
              init.block_scales = {1.0, 0.0};
            }
            Vector theta0 = sample_init(arch, init, rng);
            if (data.empty()) return model_predictor(arch, theta0, DecisionMode::Sign);
            const double n = data.size();
            switch (kind) {
              case Opt::GD: {
                const UpdateRule r = UpdateRule::gd(or_default(o.eta, cnn ? 0.01 : 0.6) / n, or_default(o.steps, cnn ? 500 : 1000));
                return run_gd_monotone(arch, theta0, r, data, Loss::Logistic).result.predictor;
              }
              case Opt::Momentum: {
                const UpdateRule r = UpdateRule::momentum(or_default(o.eta, 0.06) / n, 0.9, or_default(o.steps, 1000));
                return train_from(arch, theta0, r, data, Loss::Logistic).predictor;
              }
              case Opt::Adam: {
                const UpdateRule r = UpdateRule::adam(or_default(o.eta, 0.01), or_default(o.steps, 300));
                return train_from(arch, theta0, r, data, Loss::Logistic).predictor;
              }
            }
            throw PreconditionError("unreachable");
          }};
}

GroupSampler sampler_named(const std::string& s) {
  if (s == "haar") return GroupSampler::haar();
  if (s == "perm") return GroupSampler::permutation();
  if (s == "sign") return GroupSampler::sign_flip();
  throw ConfigError("unknown group sampler '" + s + "' (haar, perm, sign)");
}

}  // namespace

Learner make_learner(const std::string& name, const LearnerOptions& opt) {
  if (name.rfind("sym-", 0) == 0) {
    const auto colon = name.find(':');
    if (colon == std::string::npos) throw ConfigError("symmetrized learner needs sym-<group>:<inner>");
    return symmetrized(make_learner(name.substr(colon + 1), opt), sampler_named(name.substr(4, colon - 4)));
  }
  if (name == "erm-cnn-squares") return erm_learner(name, FeatureMap::PerCoordinateSquares);
  if (name == "erm-cnn-blocks") return erm_learner(name, FeatureMap::BlockSquareSums);
  if (name == "erm-cnn-conv2") return erm_learner(name, FeatureMap::Conv2SquareSums);
  if (name == "erm-cnn-linear") return erm_learner(name, FeatureMap::PerCoordinateLinear);
  if (name == "erm-cnn-regression")
    return {name, [](const LabeledSet& data, RngStream&) {
              if (data.empty()) return Predictor::constant(0.0, DecisionMode::Raw);
              return erm_cnn_regression(data).predictor;
            }};
  if (name == "kernel-quadratic")
    return {name, [](const LabeledSet& data, RngStream&) {
              if (data.empty()) return empty_fit_guard(data);
              return kernel_regression_sign(quadratic_kernel(), data);
            }};
  if (name == "bayes-quadratic")
    return {name, [](const LabeledSet& data, RngStream&) { return bayes_quadratic_regressor(data).mean; }};
  if (name == "fc-gd") return iterative_learner(name, false, Opt::GD, opt);
  if (name == "fc-momentum") return iterative_learner(name, false, Opt::Momentum, opt);
  if (name == "fc-adam") return iterative_learner(name, false, Opt::Adam, opt);
  if (name == "cnn-gd") return iterative_learner(name, true, Opt::GD, opt);
  throw ConfigError("unknown learner '" + name + "'");
}

std::vector<std::string> learner_names() {
  return {"erm-cnn-squares", "erm-cnn-blocks", "erm-cnn-conv2", "erm-cnn-linear", "erm-cnn-regression",
          "kernel-quadratic", "bayes-quadratic", "fc-gd", "fc-momentum", "fc-adam", "cnn-gd"};
}

DataSource make_task_source(const std::string& task, int d, int test_size) {
  if (test_size < 100) throw ConfigError("test set size must be at least 100");
  DataSource src;
  src.name = task;
  src.d = d;
  if (task == "onehot" || task == "texture") {
    const Task t = task == "onehot" ? onehot_task(d) : texture_task(d);
    src.d = t.d;
    src.exact_test = true;
    const LabeledSet all = t.enumerate();
    src.draw = [t, all](int n, RngStream& rng) { return TrialData{t.sample(n, rng), all}; };
    return src;
  }
  if (task == "quadratic-split") {
    const Task t = quadratic_split_task(d);
    src.draw = [t, test_size](int n, RngStream& rng) {
      LabeledSet train = t.sample(n, rng);
      return TrialData{std::move(train), t.sample(test_size, rng)};
    };
    return src;
  }
  if (task == "diag-quadratic-regression" || task == "quadratic-regression") {
    const bool diag = task == "diag-quadratic-regression";
    src.regression = true;
    src.draw = [d, diag, test_size](int n, RngStream& rng) {
      Matrix m = diag ? Matrix(gaussian_vector(d, rng).asDiagonal()) : gaussian_matrix(d, d, rng);
      const Task t = quadratic_regression_task(m);
      LabeledSet train = t.sample(n, rng);
      return TrialData{std::move(train), t.sample(test_size, rng)};
    };
    return src;
  }
  throw ConfigError("unknown task '" + task + "'");
}

DataSource make_pool_source(const std::string& name, LabeledSet pool) {
  DataSource src;
  src.name = name;
  src.d = pool.dim();
  src.draw = [pool = std::move(pool)](int n, RngStream& rng) {
    const int total = pool.size();
    if (n < 0 || n >= total)
      throw PreconditionError("pool split: need 0 ≤ n < " + std::to_string(total) + " to keep a test set");
    std::vector<int> idx(total);
    for (int i = 0; i < total; ++i) idx[i] = i;
    for (int i = total - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    Matrix tr(pool.dim(), n), te(pool.dim(), total - n);
    Vector ytr(n), yte(total - n);
    for (int i = 0; i < total; ++i) {
      if (i < n) {
        tr.col(i) = pool.points.col(idx[i]);
        ytr(i) = pool.labels(idx[i]);
      } else {
        te.col(i - n) = pool.points.col(idx[i]);
        yte(i - n) = pool.labels(idx[i]);
      }
    }
    return TrialData{LabeledSet(tr, ytr), LabeledSet(te, yte)};
  };
  return src;
}

}  // namespace eqlab
