#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eqlab/expcli/sweep.hpp"
#include "eqlab/oracles/oracles.hpp"

namespace eqlab {

// Channel-norm learning curves for cnn-gd against fc-gd.
struct Figure1Config {
  std::string source = "gaussian";  // gaussian | cifar
  std::string cifar_path;
  int channel_dim = 32;             // gaussian: two channels of this length
  std::vector<int> n_grid = {0, 4, 8, 16, 32, 64, 128, 200};
  int trials = 10;
  int test_size = 10000;
  std::uint64_t seed = 1;
  int threads = 0;
  bool timing = true;
  LearnerOptions cnn;
  LearnerOptions fc;

  void validate() const;
};

struct Figure1Analysis {
  std::vector<SweepPoint> cnn, fc;  // mean test error per n
  int cnn_n = -1;                   // smallest n with CNN accuracy ≥ target
  double cnn_accuracy = 0.0;
  double fc_accuracy_at_cnn_n = 0.0;
  int fc_n = -1;                    // smallest n with FC accuracy ≥ target; -1 if none in grid
  int grid_max = 0;
  double baseline_cnn = 0.0, baseline_fc = 0.0;  // accuracies at n = 0 (NaN if absent)
  bool cnn_reaches = false;
  bool fc_stays_low = false;         // FC accuracy ≤ fc_ceiling at cnn_n
  // fc_n ≥ 3·cnn_n; if FC never reaches the target, holds when grid_max ≥ 3·cnn_n.
  bool ratio_ok = false;
  bool ratio_lower_bound_only = false;

  bool passed() const { return cnn_reaches && fc_stays_low && ratio_ok; }
};

struct Figure1Result {
  std::vector<ExperimentRecord> records;
  Figure1Analysis analysis;
};

DataSource figure1_source(const Figure1Config& cfg);
Figure1Result run_figure1(const Figure1Config& cfg);
Figure1Analysis analyze_figure1(const std::vector<ExperimentRecord>& records, double target = 0.9,
                                double fc_ceiling = 0.75);
RunParams figure1_params(const Figure1Config& cfg);
void write_figure1_svg(std::ostream& out, const Figure1Analysis& a);
std::string summary(const Figure1Analysis& a);

// Bayes-optimal quadratic regression against the projector prediction.
struct BayesConfig {
  int d = 6;
  std::vector<int> n_grid = {0, 3, 6, 9, 12, 15, 18, 21};
  int trials = 200;
  int test_points = 2000;
  std::uint64_t seed = 1;
  double rel_tol = 0.05;
  double abs_tol = 1e-6;

  void validate() const;
};

struct BayesRow {
  int n = 0;
  double floor = 0.0;          // max(0, d(d+1) − 2n)
  McEstimate bayes;            // squared error of the posterior mean, se over trials
  McEstimate projector;        // ‖Π_n(x xᵀ)‖_F² on the same designs and points
  double rel_gap = 0.0;        // |bayes − projector| / max(projector, abs_tol)
  bool floor_ok = false;       // bayes.mean ≥ floor − 3 se
  bool match_ok = false;       // |bayes − projector| ≤ rel_tol·projector + abs_tol
};

struct BayesReport {
  int d = 0;
  std::vector<BayesRow> rows;
  // Least squares on squared coordinates with n = d + 1 diagonal-quadratic samples.
  int cnn_n = 0;
  double cnn_loss = 0.0;
  bool all_ok(double cnn_tol = 1e-10) const;
};

// Every test point draws a fresh Gaussian M, labels the design by xᵢᵀ M xᵢ and
// scores the posterior mean at x against xᵀ M x.
BayesReport run_bayes(const BayesConfig& cfg);
RunParams bayes_params(const BayesConfig& cfg);
void write_csv(std::ostream& out, const BayesReport& r);
std::string summary(const BayesReport& r);

}  // namespace eqlab
