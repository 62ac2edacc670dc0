#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eqlab/core/dataset.hpp"
#include "eqlab/core/group.hpp"
#include "eqlab/training/init.hpp"
#include "eqlab/training/learner.hpp"
#include "eqlab/training/optimizer.hpp"

namespace eqlab {

enum class CheckMode { Coupled, Stepwise, Distributional };
enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(CheckMode m);
std::string to_string(Verdict v);

struct EquivarianceReport {
  std::string learner;
  GroupKind group = GroupKind::Orthogonal;
  CheckMode mode = CheckMode::Coupled;
  // Coupled/stepwise: one entry per group element. Distributional: |z| per test point.
  std::vector<double> discrepancies;
  double max_discrepancy = 0.0;
  // Pass threshold, or the Bonferroni critical value in distributional mode.
  double threshold = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  int trials = 0;
  std::vector<std::uint64_t> seeds;
  // Entries above the fail threshold (coupled/stepwise).
  int fail_count = 0;
  // Number of training steps in the last run (doubled after an inconclusive pass).
  int steps = 0;
  std::string note;

  bool passed() const { return verdict == Verdict::Pass; }
};

struct CoupledConfig {
  std::string label;
  Architecture arch;
  InitSpec init;
  UpdateRule rule;
  Loss loss = Loss::Logistic;
  double threshold = 1e-6;       // relative: |Δscore| / (1 + max |score|)
  double fail_threshold = 1e-2;
  bool extend_inconclusive = true;
};

// Coupled trajectories: W⁰ from rng.child(i) for the i-th g, run A on data and
// B on g(data) from τ(g)W⁰, compare scores at x and g(x). Pass iff every draw is
// within threshold; fail iff a majority exceeds fail_threshold; otherwise the
// check is repeated once with twice the steps.
EquivarianceReport check_coupled(const CoupledConfig& cfg, const LabeledSet& data,
                                 const std::vector<GroupElement>& gs, const Matrix& test_points, RngStream& rng);

// One update from fresh optimizer state on each side:
// ‖τ(g)F(W, data) − F(τ(g)W, g(data))‖_max.
double check_step_invariance(const UpdateRule& rule, const Architecture& arch, const Vector& theta,
                             const LabeledSet& data, const GroupElement& g, Loss loss);

// Per g: draws W⁰, traces trajectory A and applies check_step_invariance at every
// iterate; the entry is the largest per-step value. Threshold is absolute
// (default 1e-10). Throws Error if every step passes at 1e-10 while the coupled
// discrepancy from the same W⁰ exceeds T·1e-9.
EquivarianceReport check_stepwise(const CoupledConfig& cfg, const LabeledSet& data,
                                  const std::vector<GroupElement>& gs, const Matrix& test_points, RngStream& rng,
                                  double threshold = 1e-10);

// Label-frequency comparison between learner(data)(x) and learner(g(data))(g x)
// across independent trials, two-proportion z-test per point with Bonferroni
// correction. Trial t uses rng.child(2t) and rng.child(2t + 1).
EquivarianceReport check_distributional(const Learner& learner, const LabeledSet& data, const GroupElement& g,
                                        const Matrix& test_points, int trials, RngStream& rng,
                                        double alpha = 0.01);

struct GridCell {
  std::string rule;
  std::string group;
  std::string init;
  std::string regularizer;
  bool expected_pass = true;
  std::uint64_t seed = 0;
  EquivarianceReport report;
};

struct GridOptions {
  int d = 8;
  int n = 20;
  int steps = 30;
  int draws = 5;
  std::uint64_t seed = 1;
};

// Positive cells of the update-rule × group table plus known negative cells,
// sorted by (rule, group, init, regularizer).
std::vector<GridCell> table_grid(const GridOptions& opt = {});
void write_grid_csv(std::ostream& out, const std::vector<GridCell>& cells);

}  // namespace eqlab
