#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eqlab/expcli/io.hpp"
#include "eqlab/expcli/registry.hpp"

namespace eqlab {

struct SweepConfig {
  std::string task = "onehot";
  int d = 20;
  std::vector<std::string> learners;
  std::vector<int> n_grid;
  int trials = 50;
  int test_size = 10000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  bool timing = true;
  LearnerOptions learner_options;

  void validate() const;
};

struct ExperimentRecord {
  std::string task;
  std::string learner;
  int d = 0;
  int n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double train_error = 0.0;  // classification rate, or training MSE for regression
  double test_error = 0.0;   // rate; NaN for regression
  double test_loss = 0.0;    // MSE for regression; NaN for classification
  double wall_ms = 0.0;
  bool failed = false;
  std::string note;
};

// base ⊕ FNV-1a(task|learner|n|trial).
std::uint64_t trial_seed(std::uint64_t base, const std::string& task, const std::string& learner, int n, int trial);

// One (learner, n, trial) cell; failures become rows with error 1.0.
ExperimentRecord run_trial(const DataSource& src, const Learner& learner, int n, int trial, std::uint64_t seed);

// All cells on a worker pool; rows sorted by (learner, n, trial).
std::vector<ExperimentRecord> run_sweep(const SweepConfig& cfg);
std::vector<ExperimentRecord> run_sweep(const SweepConfig& cfg, const DataSource& src);

struct SweepPoint {
  std::string learner;
  int n = 0;
  int trials = 0;
  int failures = 0;
  double mean = 0.0;  // test error, or test loss for regression
  double se = 0.0;
};

std::vector<SweepPoint> summarize(const std::vector<ExperimentRecord>& records);
// Messages for consecutive grid points where the mean rises by more than two
// combined standard errors.
std::vector<std::string> trend_flags(const std::vector<SweepPoint>& points);

RunParams sweep_params(const SweepConfig& cfg);
void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_records_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<SweepPoint>& points);

}  // namespace eqlab
