#include "eqlab/expcli/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "eqlab/core/error.hpp"
#include "eqlab/core/sym_projector.hpp"
#include "eqlab/tasks/task.hpp"
#include "eqlab/training/erm.hpp"
#include "eqlab/training/kernel.hpp"

namespace eqlab {

void Figure1Config::validate() const {
  if (source != "gaussian" && source != "cifar") throw ConfigError("figure1: source must be gaussian or cifar");
  if (source == "cifar" && cifar_path.empty()) throw ConfigError("figure1: cifar source needs a file path");
  if (source == "gaussian" && channel_dim < 1) throw ConfigError("figure1: channel dimension must be positive");
  SweepConfig probe;
  probe.learners = {"cnn-gd", "fc-gd"};
  probe.n_grid = n_grid;
  probe.trials = trials;
  probe.test_size = test_size;
  probe.threads = threads;
  probe.d = 2;
  probe.validate();
}

DataSource figure1_source(const Figure1Config& cfg) {
  if (cfg.source == "gaussian") {
    DataSource src = make_task_source("quadratic-split", 2 * cfg.channel_dim, cfg.test_size);
    src.name = "figure1-gaussian";
    return src;
  }
  return make_pool_source("figure1-cifar", cifar_channel_norm(cfg.cifar_path));
}

Figure1Result run_figure1(const Figure1Config& cfg) {
  cfg.validate();
  const DataSource src = figure1_source(cfg);
  SweepConfig sc;
  sc.task = src.name;
  sc.d = src.d;
  sc.n_grid = cfg.n_grid;
  sc.trials = cfg.trials;
  sc.test_size = cfg.test_size;
  sc.seed = cfg.seed;
  sc.threads = cfg.threads;
  sc.timing = cfg.timing;

  LearnerOptions cnn = cfg.cnn, fc = cfg.fc;
  if (cfg.source == "cifar") {
    cnn.channels = 3;
    if (fc.hidden <= 0) fc.hidden = 16;
  }
  Figure1Result out;
  sc.learners = {"cnn-gd"};
  sc.learner_options = cnn;
  out.records = run_sweep(sc, src);
  sc.learners = {"fc-gd"};
  sc.learner_options = fc;
  const auto fc_rows = run_sweep(sc, src);
  out.records.insert(out.records.end(), fc_rows.begin(), fc_rows.end());
  out.analysis = analyze_figure1(out.records);
  return out;
}

Figure1Analysis analyze_figure1(const std::vector<ExperimentRecord>& records, double target, double fc_ceiling) {
  Figure1Analysis a;
  for (const auto& p : summarize(records)) {
    if (p.learner == "cnn-gd") a.cnn.push_back(p);
    if (p.learner == "fc-gd") a.fc.push_back(p);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto accuracy_at = [](const std::vector<SweepPoint>& pts, int n) {
    for (const auto& p : pts)
      if (p.n == n) return 1.0 - p.mean;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const auto first_reaching = [target](const std::vector<SweepPoint>& pts) {
    for (const auto& p : pts)
      if (1.0 - p.mean >= target) return p.n;
    return -1;
  };
  for (const auto& p : a.cnn) a.grid_max = std::max(a.grid_max, p.n);
  for (const auto& p : a.fc) a.grid_max = std::max(a.grid_max, p.n);
  a.baseline_cnn = a.cnn.empty() || a.cnn.front().n != 0 ? nan : 1.0 - a.cnn.front().mean;
  a.baseline_fc = a.fc.empty() || a.fc.front().n != 0 ? nan : 1.0 - a.fc.front().mean;
  a.cnn_n = first_reaching(a.cnn);
  a.fc_n = first_reaching(a.fc);
  a.cnn_reaches = a.cnn_n >= 0;
  if (!a.cnn_reaches) return a;
  a.cnn_accuracy = accuracy_at(a.cnn, a.cnn_n);
  a.fc_accuracy_at_cnn_n = accuracy_at(a.fc, a.cnn_n);
  a.fc_stays_low = a.fc_accuracy_at_cnn_n <= fc_ceiling;
  if (a.fc_n >= 0) {
    a.ratio_ok = a.fc_n >= 3 * a.cnn_n;
  } else {
    a.ratio_lower_bound_only = true;
    a.ratio_ok = a.grid_max >= 3 * a.cnn_n;
  }
  return a;
}

RunParams figure1_params(const Figure1Config& cfg) {
  RunParams p;
  p.set("source", cfg.source);
  if (cfg.source == "cifar") p.set("cifar_path", cfg.cifar_path);
  p.set("channel_dim", std::to_string(cfg.channel_dim));
  std::string g;
  for (int n : cfg.n_grid) g += (g.empty() ? "" : ";") + std::to_string(n);
  p.set("n_grid", g);
  p.set("trials", std::to_string(cfg.trials));
  p.set("test_size", std::to_string(cfg.test_size));
  p.set("seed", std::to_string(cfg.seed));
  p.set("cnn_eta", format_double(cfg.cnn.eta));
  p.set("cnn_steps", std::to_string(cfg.cnn.steps));
  p.set("fc_eta", format_double(cfg.fc.eta));
  p.set("fc_steps", std::to_string(cfg.fc.steps));
  p.set("fc_hidden", std::to_string(cfg.source == "cifar" && cfg.fc.hidden <= 0 ? 16 : cfg.fc.hidden));
  return p;
}

void write_figure1_svg(std::ostream& out, const Figure1Analysis& a) {
  const auto series = [](const std::string& name, const std::vector<SweepPoint>& pts) {
    Series s;
    s.name = name;
    for (const auto& p : pts) {
      s.x.push_back(p.n);
      s.y.push_back(1.0 - p.mean);
    }
    return s;
  };
  write_svg_chart(out, "Channel-norm task: test accuracy", "training samples n", "test accuracy",
                  {series("CNN (quadratic pooling)", a.cnn), series("FC (2-layer quadratic)", a.fc)});
}

std::string summary(const Figure1Analysis& a) {
  std::ostringstream s;
  if (!a.cnn_reaches) {
    s << "CNN never reaches the target accuracy in the grid";
    return s.str();
  }
  s << "CNN accuracy " << format_double(a.cnn_accuracy, 4) << " at n=" << a.cnn_n << "; FC "
    << format_double(a.fc_accuracy_at_cnn_n, 4) << " at the same n; ";
  if (a.fc_n >= 0)
    s << "FC first reaches the target at n=" << a.fc_n;
  else
    s << "FC does not reach the target up to n=" << a.grid_max;
  return s.str();
}

void BayesConfig::validate() const {
  if (d < 1) throw ConfigError("bayes: d must be positive");
  if (n_grid.empty()) throw ConfigError("bayes: n-grid is empty");
  for (size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 0) throw ConfigError("bayes: n-grid entries must be non-negative");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("bayes: n-grid must be strictly increasing");
  }
  if (trials < 2) throw ConfigError("bayes: at least two trials are needed for a standard error");
  if (test_points < 1) throw ConfigError("bayes: test_points must be positive");
  if (rel_tol < 0.0 || abs_tol < 0.0) throw ConfigError("bayes: tolerances must be non-negative");
}

bool BayesReport::all_ok(double cnn_tol) const {
  for (const auto& r : rows)
    if (!r.floor_ok || !r.match_ok) return false;
  return cnn_loss <= cnn_tol;
}

BayesReport run_bayes(const BayesConfig& cfg) {
  cfg.validate();
  const RngStream root(cfg.seed);
  const int d = cfg.d;
  BayesReport rep;
  rep.d = d;
  for (int n : cfg.n_grid) {
    McAccumulator bayes, proj;
    const RngStream by_n = root.child(static_cast<std::uint64_t>(n));
    for (int t = 0; t < cfg.trials; ++t) {
      RngStream rng = by_n.child(static_cast<std::uint64_t>(t));
      const Matrix design = gaussian_matrix(d, n, rng);
      const BayesQuadratic model(design);
      const SymProjector pi = sym_projector(design);
      double loss = 0.0, resid = 0.0;
      for (int k = 0; k < cfg.test_points; ++k) {
        const Matrix m = gaussian_matrix(d, d, rng);
        const Vector x = gaussian_vector(d, rng);
        Vector y(n);
        for (int i = 0; i < n; ++i) y(i) = design.col(i).dot(m * design.col(i));
        const double pred = model.mean(model.weights(y), x)(0);
        const double err = x.dot(m * x) - pred;
        loss += err * err;
        resid += pi.complement_norm_sq(x);
      }
      bayes.add(loss / cfg.test_points);
      proj.add(resid / cfg.test_points);
    }
    BayesRow row;
    row.n = n;
    row.floor = regression_floor(d, n);
    row.bayes = bayes.estimate(cfg.seed);
    row.projector = proj.estimate(cfg.seed);
    const double gap = std::abs(row.bayes.mean - row.projector.mean);
    row.rel_gap = gap / std::max(row.projector.mean, cfg.abs_tol);
    row.floor_ok = row.bayes.mean >= row.floor - 3.0 * row.bayes.se;
    row.match_ok = gap <= cfg.rel_tol * row.projector.mean + cfg.abs_tol;
    rep.rows.push_back(row);
  }

  RngStream rng = root.child(0xC0FFEEull);
  rep.cnn_n = d + 1;
  const Task t = quadratic_regression_task(Matrix(gaussian_vector(d, rng).asDiagonal()));
  const LabeledSet train = t.sample(rep.cnn_n, rng);
  const LabeledSet test = t.sample(cfg.test_points, rng);
  rep.cnn_loss = mean_squared_error(erm_cnn_regression(train).predictor, test.points, test.labels);
  return rep;
}

RunParams bayes_params(const BayesConfig& cfg) {
  RunParams p;
  p.set("d", std::to_string(cfg.d));
  std::string g;
  for (int n : cfg.n_grid) g += (g.empty() ? "" : ";") + std::to_string(n);
  p.set("n_grid", g);
  p.set("trials", std::to_string(cfg.trials));
  p.set("test_points", std::to_string(cfg.test_points));
  p.set("seed", std::to_string(cfg.seed));
  p.set("rel_tol", format_double(cfg.rel_tol));
  p.set("abs_tol", format_double(cfg.abs_tol));
  return p;
}

void write_csv(std::ostream& out, const BayesReport& r) {
  write_csv_row(out, {"n", "floor", "bayes_mean", "bayes_se", "projector_mean", "projector_se", "rel_gap", "floor_ok",
                      "match_ok"});
  for (const auto& row : r.rows)
    write_csv_row(out, {std::to_string(row.n), format_double(row.floor), format_double(row.bayes.mean),
                        format_double(row.bayes.se), format_double(row.projector.mean),
                        format_double(row.projector.se), format_double(row.rel_gap), row.floor_ok ? "1" : "0",
                        row.match_ok ? "1" : "0"});
  out << "# cnn_least_squares n=" << r.cnn_n << " test_mse=" << format_double(r.cnn_loss, 6) << "\n";
}

std::string summary(const BayesReport& r) {
  int floor_ok = 0, match_ok = 0;
  double worst_gap = 0.0;
  for (const auto& row : r.rows) {
    floor_ok += row.floor_ok;
    match_ok += row.match_ok;
    if (std::isfinite(row.rel_gap)) worst_gap = std::max(worst_gap, row.rel_gap);
  }
  std::ostringstream s;
  s << "d=" << r.d << ": floor holds at " << floor_ok << "/" << r.rows.size() << " n, projector match at " << match_ok
    << "/" << r.rows.size() << " (worst relative gap " << format_double(worst_gap, 3) << "); CNN least squares n="
    << r.cnn_n << " test MSE " << format_double(r.cnn_loss, 3);
  return s.str();
}

}  // namespace eqlab
