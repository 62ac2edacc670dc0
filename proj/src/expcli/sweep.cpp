#include "eqlab/expcli/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <thread>
#include <tuple>

#include "eqlab/core/error.hpp"

namespace eqlab {

void SweepConfig::validate() const {
  if (learners.empty()) throw ConfigError("sweep: at least one learner is required");
  if (n_grid.empty()) throw ConfigError("sweep: n-grid is empty");
  for (size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 0) throw ConfigError("sweep: n-grid entries must be non-negative");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("sweep: n-grid must be strictly increasing");
  }
  if (trials < 1) throw ConfigError("sweep: trials must be at least 1");
  if (test_size < 100) throw ConfigError("sweep: test set size must be at least 100");
  if (d < 1) throw ConfigError("sweep: d must be positive");
  if (threads < 0) throw ConfigError("sweep: threads must be non-negative");
}

std::uint64_t trial_seed(std::uint64_t base, const std::string& task, const std::string& learner, int n, int trial) {
  return base ^ fnv1a64(task + "|" + learner + "|" + std::to_string(n) + "|" + std::to_string(trial));
}

namespace {

double mse(const Predictor& p, const LabeledSet& s) { return s.empty() ? 0.0 : mean_squared_error(p, s.points, s.labels); }
double err(const Predictor& p, const LabeledSet& s) { return s.empty() ? 0.0 : sign_error(p, s.points, s.labels); }

}  // namespace

ExperimentRecord run_trial(const DataSource& src, const Learner& learner, int n, int trial, std::uint64_t seed) {
  ExperimentRecord r;
  r.task = src.name;
  r.learner = learner.name;
  r.d = src.d;
  r.n = n;
  r.trial = trial;
  r.seed = seed;
  r.test_loss = r.test_error = std::numeric_limits<double>::quiet_NaN();
  const auto start = std::chrono::steady_clock::now();
  try {
    const RngStream root(seed);
    RngStream data_rng = root.child(0);
    RngStream fit_rng = root.child(1);
    const TrialData td = src.draw(n, data_rng);
    const Predictor p = learner.fit(td.train, fit_rng);
    if (src.regression) {
      r.train_error = mse(p, td.train);
      r.test_loss = mse(p, td.test);
      if (!std::isfinite(r.test_loss)) throw DivergenceError(0, "non-finite test loss");
    } else {
      r.train_error = err(p, td.train);
      r.test_error = err(p, td.test);
    }
    if (p.flagged || !p.note.empty()) r.note = p.note.empty() ? "flagged" : p.note;
  } catch (const std::exception& e) {
    r.failed = true;
    r.train_error = 1.0;
    if (src.regression)
      r.test_loss = std::numeric_limits<double>::infinity();
    else
      r.test_error = 1.0;
    r.note = std::string("failed: ") + e.what();
  }
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<ExperimentRecord> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  return run_sweep(cfg, make_task_source(cfg.task, cfg.d, cfg.test_size));
}

std::vector<ExperimentRecord> run_sweep(const SweepConfig& cfg, const DataSource& src) {
  cfg.validate();
  std::vector<Learner> learners;
  for (const auto& name : cfg.learners) learners.push_back(make_learner(name, cfg.learner_options));

  struct Cell {
    size_t learner;
    int n, trial;
  };
  std::vector<Cell> cells;
  for (size_t l = 0; l < learners.size(); ++l)
    for (int n : cfg.n_grid)
      for (int t = 0; t < cfg.trials; ++t) cells.push_back({l, n, t});

  std::vector<ExperimentRecord> out(cells.size());
  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      const Learner& l = learners[c.learner];
      out[i] = run_trial(src, l, c.n, c.trial, trial_seed(cfg.seed, src.name, l.name, c.n, c.trial));
      if (!cfg.timing) out[i].wall_ms = 0.0;
    }
  };
  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::sort(out.begin(), out.end(), [](const ExperimentRecord& a, const ExperimentRecord& b) {
    return std::tie(a.learner, a.n, a.trial) < std::tie(b.learner, b.n, b.trial);
  });
  return out;
}

std::vector<SweepPoint> summarize(const std::vector<ExperimentRecord>& records) {
  std::map<std::pair<std::string, int>, std::vector<const ExperimentRecord*>> groups;
  for (const auto& r : records) groups[{r.learner, r.n}].push_back(&r);
  std::vector<SweepPoint> out;
  for (const auto& [key, rows] : groups) {
    SweepPoint p;
    p.learner = key.first;
    p.n = key.second;
    p.trials = static_cast<int>(rows.size());
    double sum = 0.0, sq = 0.0;
    for (const auto* r : rows) {
      const double v = std::isnan(r->test_error) ? r->test_loss : r->test_error;
      sum += v;
      sq += v * v;
      p.failures += r->failed;
    }
    p.mean = sum / p.trials;
    p.se = p.trials > 1 ? std::sqrt(std::max(0.0, (sq - p.trials * p.mean * p.mean) / (p.trials - 1)) / p.trials) : 0.0;
    out.push_back(p);
  }
  return out;
}

std::vector<std::string> trend_flags(const std::vector<SweepPoint>& points) {
  std::vector<std::string> flags;
  for (size_t i = 1; i < points.size(); ++i) {
    const SweepPoint& a = points[i - 1];
    const SweepPoint& b = points[i];
    if (a.learner != b.learner) continue;
    const double tol = 2.0 * std::sqrt(a.se * a.se + b.se * b.se);
    if (b.mean > a.mean + tol)
      flags.push_back(b.learner + ": mean error rises from " + format_double(a.mean, 4) + " at n=" +
                      std::to_string(a.n) + " to " + format_double(b.mean, 4) + " at n=" + std::to_string(b.n));
  }
  return flags;
}

RunParams sweep_params(const SweepConfig& cfg) {
  RunParams p;
  p.set("task", cfg.task);
  p.set("d", std::to_string(cfg.d));
  std::string l, g;
  for (const auto& s : cfg.learners) l += (l.empty() ? "" : ";") + s;
  for (int n : cfg.n_grid) g += (g.empty() ? "" : ";") + std::to_string(n);
  p.set("learners", l);
  p.set("n_grid", g);
  p.set("trials", std::to_string(cfg.trials));
  p.set("test_size", std::to_string(cfg.test_size));
  p.set("seed", std::to_string(cfg.seed));
  const LearnerOptions& o = cfg.learner_options;
  p.set("eta", format_double(o.eta));
  p.set("steps", std::to_string(o.steps));
  p.set("hidden", std::to_string(o.hidden));
  p.set("sigma", format_double(o.sigma));
  p.set("activation", o.activation);
  return p;
}

namespace {

const std::vector<std::string> kRecordColumns = {"task",       "learner",   "d",         "n",       "trial", "seed",
                                                  "train_error", "test_error", "test_loss", "wall_ms", "note"};

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  write_csv_row(out, kRecordColumns);
  for (const auto& r : records)
    write_csv_row(out, {r.task, r.learner, std::to_string(r.d), std::to_string(r.n), std::to_string(r.trial),
                        std::to_string(r.seed), format_double(r.train_error, 17), format_double(r.test_error, 17),
                        format_double(r.test_loss, 17), format_double(r.wall_ms, 6), r.note});
}

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
  const auto rows = read_csv(in);
  if (rows.empty() || rows[0] != kRecordColumns) throw ParseError(0, "records csv: unexpected header");
  const auto num = [](const std::string& s) {
    return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
  };
  std::vector<ExperimentRecord> out;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != kRecordColumns.size()) throw ParseError(i, "records csv: wrong field count in row " + std::to_string(i));
    ExperimentRecord r;
    try {
      r.task = f[0];
      r.learner = f[1];
      r.d = std::stoi(f[2]);
      r.n = std::stoi(f[3]);
      r.trial = std::stoi(f[4]);
      r.seed = std::stoull(f[5]);
      r.train_error = num(f[6]);
      r.test_error = num(f[7]);
      r.test_loss = num(f[8]);
      r.wall_ms = num(f[9]);
    } catch (const std::exception&) {
      throw ParseError(i, "records csv: malformed number in row " + std::to_string(i));
    }
    r.note = f[10];
    r.failed = r.note.rfind("failed:", 0) == 0;
    out.push_back(r);
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  write_csv_row(out, {"learner", "n", "trials", "failures", "mean", "se"});
  for (const auto& p : points)
    write_csv_row(out, {p.learner, std::to_string(p.n), std::to_string(p.trials), std::to_string(p.failures),
                        format_double(p.mean, 10), format_double(p.se, 10)});
}

}  // namespace eqlab
