#include "eqlab/equivariance/equivariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <tuple>

#include <boost/math/distributions/normal.hpp>

#include "eqlab/core/error.hpp"
#include "eqlab/training/iterative.hpp"

namespace eqlab {

std::string to_string(CheckMode m) {
  switch (m) {
    case CheckMode::Coupled: return "coupled";
    case CheckMode::Stepwise: return "stepwise";
    case CheckMode::Distributional: return "distributional";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

void require_fc(const Architecture& arch) {
  if (!std::holds_alternative<FCShape>(arch))
    throw PreconditionError("equivariance: the weight action is only defined for fully-connected models");
}

void require_group(const std::vector<GroupElement>& gs, int d) {
  if (gs.empty()) throw PreconditionError("equivariance: empty group list");
  for (const auto& g : gs)
    if (g.dim() != d) throw DimensionError("equivariance: group element dimension differs from the data");
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    m = std::max(m, x);
  }
  return m;
}

// Relative score gap between the original and transformed trajectories, or
// NaN if either diverged.
double coupled_gap(const CoupledConfig& cfg, const UpdateRule& rule, const Vector& w0, const LabeledSet& data,
                   const LabeledSet& gdata, const GroupElement& g, const Matrix& x, const Matrix& gx) {
  try {
    const Vector a = train_from(cfg.arch, w0, rule, data, cfg.loss).theta;
    const Vector b = train_from(cfg.arch, weight_action_flat(cfg.arch, g, w0), rule, gdata, cfg.loss).theta;
    const Vector sa = forward_batch(cfg.arch, a, x);
    const Vector sb = forward_batch(cfg.arch, b, gx);
    const double gap = (sa - sb).cwiseAbs().maxCoeff() / (1.0 + sa.cwiseAbs().maxCoeff());
    return std::isfinite(gap) ? gap : std::numeric_limits<double>::quiet_NaN();
  } catch (const DivergenceError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

Verdict classify(const std::vector<double>& gaps, double threshold, double fail_threshold, int& fail_count) {
  fail_count = 0;
  bool all_pass = true;
  for (double v : gaps) {
    if (!(v <= threshold)) all_pass = false;
    if (v > fail_threshold) ++fail_count;
  }
  if (all_pass) return Verdict::Pass;
  if (2 * fail_count > static_cast<int>(gaps.size())) return Verdict::Fail;
  return Verdict::Inconclusive;
}

}  // namespace

EquivarianceReport check_coupled(const CoupledConfig& cfg, const LabeledSet& data,
                                 const std::vector<GroupElement>& gs, const Matrix& test_points, RngStream& rng) {
  require_fc(cfg.arch);
  require_group(gs, data.dim());
  if (test_points.rows() != data.dim() || test_points.cols() == 0)
    throw DimensionError("check_coupled: test points must be d × m with m > 0");
  cfg.rule.validate();

  EquivarianceReport rep;
  rep.learner = cfg.label.empty() ? describe(cfg.rule) : cfg.label;
  rep.group = gs.front().kind();
  rep.mode = CheckMode::Coupled;
  rep.threshold = cfg.threshold;
  rep.trials = static_cast<int>(gs.size());

  std::vector<Vector> w0(gs.size());
  for (size_t i = 0; i < gs.size(); ++i) {
    RngStream r = rng.child(i);
    rep.seeds.push_back(r.stream_id());
    w0[i] = sample_init(cfg.arch, cfg.init, r);
  }

  UpdateRule rule = cfg.rule;
  for (int attempt = 0; attempt < 2; ++attempt) {
    rep.discrepancies.clear();
    for (size_t i = 0; i < gs.size(); ++i) {
      const GroupElement& g = gs[i];
      rep.discrepancies.push_back(
          coupled_gap(cfg, rule, w0[i], data, data.transformed(g), g, test_points, g.apply_columns(test_points)));
    }
    rep.steps = rule.steps;
    rep.verdict = classify(rep.discrepancies, cfg.threshold, cfg.fail_threshold, rep.fail_count);
    if (rep.verdict != Verdict::Inconclusive || !cfg.extend_inconclusive) break;
    if (attempt == 0) rule.steps *= 2;
  }
  rep.max_discrepancy = max_of(rep.discrepancies);
  if (std::isnan(rep.max_discrepancy)) rep.note = "a trajectory diverged";
  return rep;
}

double check_step_invariance(const UpdateRule& rule, const Architecture& arch, const Vector& theta,
                             const LabeledSet& data, const GroupElement& g, Loss loss) {
  require_fc(arch);
  if (g.dim() != data.dim() || g.dim() != input_dim(arch))
    throw DimensionError("check_step_invariance: group element dimension differs from the data");
  UpdateRule one = rule;
  one.steps = 1;
  Vector a = theta;
  Optimizer(one, arch).step(a, data, loss);
  Vector b = weight_action_flat(arch, g, theta);
  Optimizer(one, arch).step(b, data.transformed(g), loss);
  return (weight_action_flat(arch, g, a) - b).cwiseAbs().maxCoeff();
}

EquivarianceReport check_stepwise(const CoupledConfig& cfg, const LabeledSet& data,
                                  const std::vector<GroupElement>& gs, const Matrix& test_points, RngStream& rng,
                                  double threshold) {
  require_fc(cfg.arch);
  require_group(gs, data.dim());
  cfg.rule.validate();

  EquivarianceReport rep;
  rep.learner = cfg.label.empty() ? describe(cfg.rule) : cfg.label;
  rep.group = gs.front().kind();
  rep.mode = CheckMode::Stepwise;
  rep.threshold = threshold;
  rep.trials = static_cast<int>(gs.size());
  rep.steps = cfg.rule.steps;

  for (size_t i = 0; i < gs.size(); ++i) {
    RngStream r = rng.child(i);
    rep.seeds.push_back(r.stream_id());
    const Vector w0 = sample_init(cfg.arch, cfg.init, r);
    const GroupElement& g = gs[i];
    double worst = 0.0;
    try {
      const TrainResult run = train_from(cfg.arch, w0, cfg.rule, data, cfg.loss, true);
      for (size_t t = 0; t + 1 < run.trace.snapshots.size(); ++t)
        worst = std::max(worst, check_step_invariance(cfg.rule, cfg.arch, run.trace.snapshots[t], data, g, cfg.loss));
    } catch (const DivergenceError&) {
      worst = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isnan(worst) && worst <= 1e-10 && test_points.cols() > 0) {
      const double coupled =
          coupled_gap(cfg, cfg.rule, w0, data, data.transformed(g), g, test_points, g.apply_columns(test_points));
      if (!(coupled <= cfg.rule.steps * 1e-9))
        throw Error("check_stepwise: every step is equivariant but the coupled discrepancy is " +
                    std::to_string(coupled));
    }
    rep.discrepancies.push_back(worst);
  }
  rep.verdict = classify(rep.discrepancies, threshold, cfg.fail_threshold, rep.fail_count);
  rep.max_discrepancy = max_of(rep.discrepancies);
  if (std::isnan(rep.max_discrepancy)) rep.note = "a trajectory diverged";
  return rep;
}

EquivarianceReport check_distributional(const Learner& learner, const LabeledSet& data, const GroupElement& g,
                                        const Matrix& test_points, int trials, RngStream& rng, double alpha) {
  if (trials < 50) throw PreconditionError("check_distributional: at least 50 trials are required");
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("check_distributional: alpha must lie in (0, 1)");
  if (g.dim() != data.dim() || test_points.rows() != data.dim() || test_points.cols() == 0)
    throw DimensionError("check_distributional: dimensions of g, data and test points differ");

  const Eigen::Index m = test_points.cols();
  const LabeledSet gdata = data.transformed(g);
  const Matrix gx = g.apply_columns(test_points);
  Eigen::VectorXi pos_a = Eigen::VectorXi::Zero(m), pos_b = Eigen::VectorXi::Zero(m);

  EquivarianceReport rep;
  rep.learner = learner.name;
  rep.group = g.kind();
  rep.mode = CheckMode::Distributional;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    RngStream ra = rng.child(2 * static_cast<std::uint64_t>(t));
    RngStream rb = rng.child(2 * static_cast<std::uint64_t>(t) + 1);
    rep.seeds.push_back(ra.stream_id());
    const Vector sa = learner.fit(data, ra).score_batch(test_points);
    const Vector sb = learner.fit(gdata, rb).score_batch(gx);
    for (Eigen::Index j = 0; j < m; ++j) {
      pos_a(j) += sign_label(sa(j)) > 0;
      pos_b(j) += sign_label(sb(j)) > 0;
    }
  }

  const boost::math::normal_distribution<double> normal;
  rep.threshold = boost::math::quantile(boost::math::complement(normal, alpha / (2.0 * m)));
  for (Eigen::Index j = 0; j < m; ++j) {
    const double pa = static_cast<double>(pos_a(j)) / trials;
    const double pb = static_cast<double>(pos_b(j)) / trials;
    const double pooled = 0.5 * (pa + pb);
    const double var = pooled * (1.0 - pooled) * 2.0 / trials;
    rep.discrepancies.push_back(var > 0.0 ? std::abs(pa - pb) / std::sqrt(var) : 0.0);
  }
  rep.max_discrepancy = max_of(rep.discrepancies);
  rep.fail_count = static_cast<int>(
      std::count_if(rep.discrepancies.begin(), rep.discrepancies.end(), [&](double z) { return z >= rep.threshold; }));
  rep.verdict = rep.fail_count == 0 ? Verdict::Pass : Verdict::Fail;
  return rep;
}

namespace {

struct CellSpec {
  std::string rule, group, init, regularizer;
  bool expected_pass;
  bool stepwise;
};

UpdateRule grid_rule(const std::string& name, int steps) {
  if (name == "gd") return UpdateRule::gd(0.005, steps);
  if (name == "momentum") return UpdateRule::momentum(0.002, 0.9, steps);
  if (name == "adam") return UpdateRule::adam(0.01, steps);
  if (name == "adagrad") return UpdateRule::adagrad(0.05, steps);
  if (name == "newton") return UpdateRule::newton(0.5, std::min(steps, 10));
  throw PreconditionError("table_grid: unknown rule " + name);
}

InitSpec grid_init(const std::string& name) {
  if (name == "gaussian") return InitSpec::gaussian(0.3);
  if (name == "zero-first-layer") return InitSpec::zero_first_layer(0.5);
  if (name == "symmetric") return InitSpec::symmetric("rademacher", 0.3);
  throw PreconditionError("table_grid: unknown init " + name);
}

GroupElement grid_group(const std::string& name, int d, RngStream& rng) {
  return sample_group(parse_group_kind(name), d, rng);
}

}  // namespace

std::vector<GridCell> table_grid(const GridOptions& opt) {
  if (opt.d < 2 || opt.n < 1 || opt.steps < 1 || opt.draws < 1) throw PreconditionError("table_grid: bad options");
  const std::vector<CellSpec> specs = {
      {"gd", "orthogonal", "gaussian", "none", true, false},
      {"gd", "orthogonal", "gaussian", "l2", true, false},
      {"momentum", "orthogonal", "gaussian", "l2", true, false},
      {"gd", "permutation", "gaussian", "l1", true, false},
      {"adam", "permutation", "gaussian", "l1", true, false},
      {"adagrad", "permutation", "gaussian", "none", true, false},
      {"adam", "sign-flip", "symmetric", "l1", true, false},
      {"adagrad", "sign-flip", "symmetric", "l2", true, false},
      {"newton", "general-linear", "zero-first-layer", "none", true, false},
      {"adam", "orthogonal", "gaussian", "none", false, false},
      {"adagrad", "orthogonal", "gaussian", "none", false, false},
      {"gd", "orthogonal", "gaussian", "l1", false, true},
      {"gd", "general-linear", "gaussian", "none", false, false},
  };

  const RngStream root(opt.seed);
  std::vector<GridCell> cells;
  for (size_t c = 0; c < specs.size(); ++c) {
    const CellSpec& s = specs[c];
    RngStream rng = root.child(c);
    const bool newton = s.rule == "newton";

    CoupledConfig cfg;
    cfg.arch = newton ? Architecture(FCShape{{opt.d, 1, 1}, Activation::Identity})
                      : Architecture(FCShape{{opt.d, opt.d, 1}, Activation::Quadratic});
    cfg.loss = newton ? Loss::Squared : Loss::Logistic;
    cfg.init = grid_init(s.init);
    cfg.rule = grid_rule(s.rule, opt.steps);
    if (s.regularizer != "none") {
      cfg.rule.p = s.regularizer == "l1" ? 1.0 : 2.0;
      cfg.rule.lambda = s.stepwise ? 4.0 : 0.01;
    }
    cfg.label = s.rule + "/" + s.regularizer;
    if (s.group == "general-linear") {
      cfg.threshold = 1e-5;
      // g(data) can be stretched by up to the condition bound.
      if (!newton) cfg.rule.eta *= 0.05;
    }

    RngStream data_rng = rng.child(1000);
    Matrix x = gaussian_matrix(opt.d, opt.n, data_rng);
    const Vector u = gaussian_vector(opt.d, data_rng);
    Vector y(opt.n);
    for (int i = 0; i < opt.n; ++i) y(i) = sign_label(x.col(i).dot(u) + 0.5 * x(0, i) * x(1 % opt.d, i));
    const LabeledSet data(x, y);
    const Matrix test = gaussian_matrix(opt.d, 32, data_rng);

    std::vector<GroupElement> gs;
    for (int i = 0; i < opt.draws; ++i) gs.push_back(grid_group(s.group, opt.d, data_rng));

    GridCell cell{s.rule, s.group, s.init, s.regularizer, s.expected_pass, rng.stream_id(), {}};
    cell.report = s.stepwise ? check_stepwise(cfg, data, gs, test, rng) : check_coupled(cfg, data, gs, test, rng);
    cells.push_back(std::move(cell));
  }
  std::sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
    return std::tie(a.rule, a.group, a.init, a.regularizer) < std::tie(b.rule, b.group, b.init, b.regularizer);
  });
  return cells;
}

void write_grid_csv(std::ostream& out, const std::vector<GridCell>& cells) {
  out << "rule,group,init,regularizer,mode,discrepancy,verdict,seed\n";
  char buf[64];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%.6e", c.report.max_discrepancy);
    out << c.rule << ',' << c.group << ',' << c.init << ',' << c.regularizer << ',' << to_string(c.report.mode)
        << ',' << buf << ',' << to_string(c.report.verdict) << ',' << c.seed << '\n';
  }
}

}  // namespace eqlab
