#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "eqlab/tasks/task.hpp"
#include "eqlab/training/learner.hpp"

namespace eqlab {

// Overrides for the iterative learners; negative or zero means the learner default.
struct LearnerOptions {
  double eta = -1.0;
  int steps = -1;
  int hidden = 0;
  double sigma = -1.0;
  std::string activation = "quadratic";
  int channels = 2;  // cnn-gd: equal-length pooling blocks
};

// Names: erm-cnn-{squares,blocks,conv2,linear}, erm-cnn-regression, kernel-quadratic,
// bayes-quadratic, fc-gd, fc-adam, fc-momentum, cnn-gd, and sym-{haar,perm,sign}:<inner>.
// GD learners use η/n on the summed loss (mean-loss GD) and halve η until the
// loss is monotone. Empty training sets yield the initialization's predictor.
Learner make_learner(const std::string& name, const LearnerOptions& opt = {});
std::vector<std::string> learner_names();

// Train/test split for one trial.
struct TrialData {
  LabeledSet train;
  LabeledSet test;
};

struct DataSource {
  std::string name;
  int d = 0;
  bool regression = false;
  bool exact_test = false;  // test set is the full finite support
  std::function<TrialData(int n, RngStream& rng)> draw;
};

// Tasks: onehot, texture, quadratic-split, diag-quadratic-regression,
// quadratic-regression. Finite tasks test by enumeration; others on
// test_size fresh samples.
DataSource make_task_source(const std::string& task, int d, int test_size);
// Fixed pool of labeled points: each trial trains on n points drawn without
// replacement and tests on the rest.
DataSource make_pool_source(const std::string& name, LabeledSet pool);

}  // namespace eqlab
