#include "eqlab/expcli/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "eqlab/core/error.hpp"
#include "eqlab/equivariance/equivariance.hpp"
#include "eqlab/expcli/experiments.hpp"
#include "eqlab/oracles/oracles.hpp"

namespace eqlab {

namespace {

class AssertionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Output sink: a file when --out is given, otherwise the caller's stream.
struct Sink {
  std::unique_ptr<std::ofstream> file;
  std::ostream* stream = nullptr;

  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream = &fallback;
      return;
    }
    file = std::make_unique<std::ofstream>(path);
    if (!*file) throw Error("cannot open output file " + path);
    stream = file.get();
  }
  std::ostream& operator*() { return *stream; }
};

void write_svg_file(const std::string& path, const std::string& command, const RunParams& params, std::uint64_t seed,
                    const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open output file " + path);
  f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  f << "<!-- eqlab " << kToolVersion << " " << command << " config_hash " << params.hash() << " seed " << seed
    << " -->\n";
  body(f);
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

// Finds --config before CLI11 runs so file values can seed the option defaults.
std::string prescan_config(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

struct Common {
  std::string out_path;
  std::string config_path;
  bool assert_mode = false;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw AssertionFailed(what);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  Config cfg;
  try {
    const std::string path = prescan_config(argc, argv);
    if (!path.empty()) cfg = Config::load(path);
  } catch (const Error& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  CLI::App app{"eqlab: equivariance and sample-complexity experiments"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config_path, "INI file; [section] per subcommand, flags override");
  app.add_option("--out", common.out_path, "output file (default stdout)");
  app.add_flag("--assert", common.assert_mode, "exit 3 when the run's acceptance check fails");

  std::function<void()> action;

  // sweep
  SweepConfig sw;
  std::string sw_learners = cfg.get("sweep.learners", "erm-cnn-linear");
  std::string sw_grid = cfg.get("sweep.n_grid", "0,5,10,20");
  std::string sw_summary;
  std::vector<std::string> sw_expect;
  sw.task = cfg.get("sweep.task", sw.task);
  sw.d = cfg.get_int("sweep.d", sw.d);
  sw.trials = cfg.get_int("sweep.trials", sw.trials);
  sw.test_size = cfg.get_int("sweep.test_size", sw.test_size);
  sw.seed = static_cast<std::uint64_t>(cfg.get_long("sweep.seed", 1));
  sw.threads = cfg.get_int("sweep.threads", 0);
  sw.timing = cfg.get_bool("sweep.timing", true);
  sw.learner_options.eta = cfg.get_double("sweep.eta", -1.0);
  sw.learner_options.steps = cfg.get_int("sweep.steps", -1);
  sw.learner_options.hidden = cfg.get_int("sweep.hidden", 0);
  sw.learner_options.activation = cfg.get("sweep.activation", "quadratic");
  auto* sweep = app.add_subcommand("sweep", "sample-complexity sweep over an n-grid");
  sweep->add_option("--task", sw.task, "onehot | texture | quadratic-split | diag-quadratic-regression | quadratic-regression");
  sweep->add_option("--d", sw.d);
  sweep->add_option("--learners", sw_learners, "comma-separated learner names");
  sweep->add_option("--n-grid", sw_grid, "a,b,c or start:step:stop");
  sweep->add_option("--trials", sw.trials);
  sweep->add_option("--test-size", sw.test_size);
  sweep->add_option("--seed", sw.seed);
  sweep->add_option("--threads", sw.threads);
  sweep->add_option("--eta", sw.learner_options.eta);
  sweep->add_option("--steps", sw.learner_options.steps);
  sweep->add_option("--hidden", sw.learner_options.hidden);
  sweep->add_option("--activation", sw.learner_options.activation);
  sweep->add_flag("!--no-timing", sw.timing, "write wall_ms = 0 so reruns are byte-identical");
  sweep->add_option("--summary", sw_summary, "also write per-(learner, n) means to this CSV");
  sweep->add_option("--expect", sw_expect, "assertion learner:n:ge|le:value on the mean (with --assert)");
  sweep->callback([&] {
    action = [&] {
      sw.learners = split(sw_learners, ',');
      sw.n_grid = parse_int_list(sw_grid);
      sw.validate();
      const auto rows = run_sweep(sw);
      const RunParams params = sweep_params(sw);
      Sink sink(common.out_path, out);
      write_header(*sink, "sweep", params, sw.seed);
      write_records_csv(*sink, rows);
      const auto points = summarize(rows);
      if (!sw_summary.empty()) {
        Sink s(sw_summary, out);
        write_header(*s, "sweep", params, sw.seed);
        write_summary_csv(*s, points);
      }
      int failures = 0;
      for (const auto& p : points) {
        log << p.learner << " n=" << p.n << " mean=" << format_double(p.mean, 4) << " se=" << format_double(p.se, 3)
            << (p.failures ? " failures=" + std::to_string(p.failures) : "") << "\n";
        failures += p.failures;
      }
      for (const auto& f : trend_flags(points)) log << "trend flag: " << f << "\n";
      if (!common.assert_mode) return;
      check(failures == 0, std::to_string(failures) + " failed trials");
      for (const auto& e : sw_expect) {
        const auto parts = split(e, ':');
        if (parts.size() != 4 || (parts[2] != "ge" && parts[2] != "le"))
          throw ConfigError("--expect needs learner:n:ge|le:value, got '" + e + "'");
        const int n = parse_int_list(parts[1]).at(0);
        const double v = parse_double_list(parts[3]).at(0);
        bool found = false;
        for (const auto& p : points) {
          if (p.learner != parts[0] || p.n != n) continue;
          found = true;
          check(parts[2] == "ge" ? p.mean >= v : p.mean <= v,
                "expectation " + e + " failed (mean " + format_double(p.mean, 6) + ")");
        }
        if (!found) throw ConfigError("--expect refers to a point not in the sweep: " + e);
      }
    };
  });

  // figure1
  Figure1Config f1;
  std::string f1_grid = cfg.get("figure1.n_grid", join(f1.n_grid));
  std::string f1_svg = cfg.get("figure1.svg", "");
  f1.source = cfg.get("figure1.source", f1.source);
  f1.cifar_path = cfg.get("figure1.cifar", "");
  f1.channel_dim = cfg.get_int("figure1.channel_dim", f1.channel_dim);
  f1.trials = cfg.get_int("figure1.trials", f1.trials);
  f1.test_size = cfg.get_int("figure1.test_size", f1.test_size);
  f1.seed = static_cast<std::uint64_t>(cfg.get_long("figure1.seed", 1));
  f1.threads = cfg.get_int("figure1.threads", 0);
  f1.timing = cfg.get_bool("figure1.timing", true);
  f1.cnn.eta = cfg.get_double("figure1.cnn_eta", -1.0);
  f1.cnn.steps = cfg.get_int("figure1.cnn_steps", -1);
  f1.fc.eta = cfg.get_double("figure1.fc_eta", -1.0);
  f1.fc.steps = cfg.get_int("figure1.fc_steps", -1);
  f1.fc.hidden = cfg.get_int("figure1.fc_hidden", 0);
  auto* fig = app.add_subcommand("figure1", "CNN vs FC learning curves on the channel-norm task");
  fig->add_option("--source", f1.source, "gaussian | cifar");
  fig->add_option("--cifar", f1.cifar_path, "CIFAR-10 binary batch file");
  fig->add_option("--channel-dim", f1.channel_dim, "gaussian source: length of each of the two channels");
  fig->add_option("--n-grid", f1_grid);
  fig->add_option("--trials", f1.trials);
  fig->add_option("--test-size", f1.test_size);
  fig->add_option("--seed", f1.seed);
  fig->add_option("--threads", f1.threads);
  fig->add_option("--cnn-eta", f1.cnn.eta, "per-sample step size (divided by n)");
  fig->add_option("--cnn-steps", f1.cnn.steps);
  fig->add_option("--fc-eta", f1.fc.eta, "per-sample step size (divided by n)");
  fig->add_option("--fc-steps", f1.fc.steps);
  fig->add_option("--fc-hidden", f1.fc.hidden);
  fig->add_flag("!--no-timing", f1.timing);
  fig->add_option("--svg", f1_svg, "learning-curve chart");
  fig->callback([&] {
    action = [&] {
      f1.n_grid = parse_int_list(f1_grid);
      f1.validate();
      const Figure1Result res = run_figure1(f1);
      const RunParams params = figure1_params(f1);
      Sink sink(common.out_path, out);
      write_header(*sink, "figure1", params, f1.seed);
      write_records_csv(*sink, res.records);
      if (!f1_svg.empty())
        write_svg_file(f1_svg, "figure1", params, f1.seed, [&](std::ostream& o) { write_figure1_svg(o, res.analysis); });
      log << summary(res.analysis) << "\n";
      if (common.assert_mode) check(res.analysis.passed(), "CNN vs FC trend not reproduced");
    };
  });

  // equiv
  GridOptions go;
  go.d = cfg.get_int("equiv.d", go.d);
  go.n = cfg.get_int("equiv.n", go.n);
  go.steps = cfg.get_int("equiv.steps", go.steps);
  go.draws = cfg.get_int("equiv.draws", go.draws);
  go.seed = static_cast<std::uint64_t>(cfg.get_long("equiv.seed", 1));
  std::string eq_rule = cfg.get("equiv.rule", ""), eq_group = cfg.get("equiv.group", "");
  auto* equiv = app.add_subcommand("equiv", "update-rule x group equivariance table");
  equiv->add_option("--d", go.d);
  equiv->add_option("--n", go.n);
  equiv->add_option("--steps", go.steps);
  equiv->add_option("--draws", go.draws);
  equiv->add_option("--seed", go.seed);
  equiv->add_option("--rule", eq_rule, "keep only cells with this rule");
  equiv->add_option("--group", eq_group, "keep only cells with this group");
  equiv->callback([&] {
    action = [&] {
      if (go.d < 2 || go.n < 1 || go.steps < 1 || go.draws < 1) throw ConfigError("equiv: d ≥ 2, n, steps, draws ≥ 1");
      std::vector<GridCell> cells;
      for (auto& c : table_grid(go))
        if ((eq_rule.empty() || c.rule == eq_rule) && (eq_group.empty() || c.group == eq_group)) cells.push_back(c);
      if (cells.empty()) throw ConfigError("equiv: no cell matches the rule/group filter");
      RunParams params;
      params.set("d", std::to_string(go.d));
      params.set("n", std::to_string(go.n));
      params.set("steps", std::to_string(go.steps));
      params.set("draws", std::to_string(go.draws));
      params.set("rule", eq_rule);
      params.set("group", eq_group);
      Sink sink(common.out_path, out);
      write_header(*sink, "equiv", params, go.seed);
      write_grid_csv(*sink, cells);
      int unexpected = 0;
      for (const auto& c : cells) {
        const bool as_expected = c.report.passed() == c.expected_pass;
        unexpected += !as_expected;
        log << c.rule << "/" << c.group << "/" << c.init << "/" << c.regularizer << ": "
            << to_string(c.report.verdict) << " (" << format_double(c.report.max_discrepancy, 3) << ")"
            << (as_expected ? "" : " UNEXPECTED") << "\n";
      }
      if (common.assert_mode) check(unexpected == 0, std::to_string(unexpected) + " cells differ from expectation");
    };
  });

  // oracle
  std::string or_name;
  int or_d = cfg.get_int("oracle.d", 8);
  int or_n = cfg.get_int("oracle.n", 10);
  int or_count = cfg.get_int("oracle.count", 20);
  int or_trials = cfg.get_int("oracle.trials", 100);
  long or_samples = cfg.get_long("oracle.samples", 1000000);
  std::string or_matrix = cfg.get("oracle.matrix", "random");
  std::string or_grid = cfg.get("oracle.n_grid", "0,3,6,9,12,15,18,21");
  bool or_outside = cfg.get_bool("oracle.allow_outside_regime", false);
  std::uint64_t or_seed = static_cast<std::uint64_t>(cfg.get_long("oracle.seed", 1));
  auto* oracle = app.add_subcommand("oracle", "numerical oracles");
  oracle->add_option("name", or_name, "matrix_var | rho | regression_floor | projection | scalar")->required();
  oracle->add_option("--d", or_d);
  oracle->add_option("--n", or_n, "projection: number of points");
  oracle->add_option("--count", or_count, "matrix_var: matrices; rho: pairs");
  oracle->add_option("--trials", or_trials, "projection trials");
  oracle->add_option("--samples", or_samples);
  oracle->add_option("--matrix", or_matrix, "matrix_var: identity | random");
  oracle->add_option("--n-grid", or_grid, "regression_floor grid");
  oracle->add_flag("--allow-outside-regime", or_outside, "projection: run n beyond the lemma's range");
  oracle->add_option("--seed", or_seed);
  oracle->callback([&] {
    action = [&] {
      if (or_d < 1 || or_samples < 2 || or_count < 1 || or_trials < 1) throw ConfigError("oracle: invalid parameters");
      RngStream rng(or_seed);
      RunParams params;
      params.set("name", or_name);
      params.set("d", std::to_string(or_d));
      params.set("samples", std::to_string(or_samples));
      Sink sink(common.out_path, out);
      if (or_name == "matrix_var") {
        params.set("matrix", or_matrix);
        params.set("count", std::to_string(or_count));
        write_header(*sink, "oracle", params, or_seed);
        write_csv_row(*sink, {"index", "closed_form", "mc_mean", "mc_se", "z"});
        const int count = or_matrix == "identity" ? 1 : or_count;
        if (or_matrix != "identity" && or_matrix != "random") throw ConfigError("oracle matrix_var: --matrix identity|random");
        int ok = 0;
        for (int i = 0; i < count; ++i) {
          RngStream r = rng.child(static_cast<std::uint64_t>(i));
          const Matrix m = or_matrix == "identity" ? Matrix(Matrix::Identity(or_d, or_d)) : gaussian_matrix(or_d, or_d, r);
          const double closed = matrix_var_closed(m);
          const McEstimate mc = matrix_var_mc(m, or_samples, r);
          const double z = mc.se > 0 ? (mc.mean - closed) / mc.se : (mc.mean == closed ? 0.0 : INFINITY);
          ok += std::abs(z) <= 4.0;
          write_csv_row(*sink, {std::to_string(i), format_double(closed, 17), format_double(mc.mean, 17),
                                format_double(mc.se, 6), format_double(z, 4)});
          if (or_matrix == "identity") log << "closed form for I_" << or_d << ": " << format_double(closed) << "\n";
        }
        log << ok << "/" << count << " within 4 se\n";
        if (common.assert_mode) {
          check(ok == count, "matrix_var: estimate outside 4 se");
          if (or_matrix == "identity") check(matrix_var_closed(Matrix::Identity(or_d, or_d)) == 2.0 * or_d + double(or_d) * or_d, "matrix_var: identity closed form");
        }
      } else if (or_name == "rho") {
        params.set("count", std::to_string(or_count));
        write_header(*sink, "oracle", params, or_seed);
        write_csv_row(*sink, {"pair", "empirical", "empirical_se", "arccos", "arccos_se", "z"});
        int ok = 0;
        for (int i = 0; i < or_count; ++i) {
          RngStream r = rng.child(static_cast<std::uint64_t>(i));
          const Matrix u = haar_orthogonal(or_d, r).matrix(), v = haar_orthogonal(or_d, r).matrix();
          RngStream r1 = r.child(1), r2 = r.child(2);
          const McEstimate e = rho_empirical(u, v, or_samples, r1);
          const McEstimate a = rho_arccos(u, v, or_samples, r2);
          const double se = std::hypot(e.se, a.se);
          const double z = se > 0 ? (e.mean - a.mean) / se : 0.0;
          ok += std::abs(z) <= 3.0;
          write_csv_row(*sink, {std::to_string(i), format_double(e.mean, 10), format_double(e.se, 4),
                                format_double(a.mean, 10), format_double(a.se, 4), format_double(z, 4)});
        }
        RngStream r0 = rng.child(1u << 20);
        const Matrix u = haar_orthogonal(or_d, r0).matrix();
        const double self = rho_empirical(u, u, 1000, r0).mean;
        log << ok << "/" << or_count << " pairs agree within 3 se; rho(U,U) = " << self << "\n";
        if (common.assert_mode) check(ok == or_count && self == 0.0, "rho: estimators disagree");
      } else if (or_name == "regression_floor") {
        params.set("n_grid", or_grid);
        write_header(*sink, "oracle", params, or_seed);
        write_csv_row(*sink, {"n", "floor", "mc_mean", "mc_se"});
        bool ok = true;
        for (int n : parse_int_list(or_grid)) {
          RngStream r = rng.child(static_cast<std::uint64_t>(n));
          const McEstimate mc = regression_floor_mc(or_d, n, or_samples, r);
          const double fl = regression_floor(or_d, n);
          ok = ok && mc.mean >= fl - 3.0 * mc.se;
          write_csv_row(*sink, {std::to_string(n), format_double(fl), format_double(mc.mean, 10), format_double(mc.se, 4)});
        }
        if (common.assert_mode) check(ok, "regression floor violated");
      } else if (or_name == "projection") {
        params.set("n", std::to_string(or_n));
        params.set("trials", std::to_string(or_trials));
        params.set("allow_outside_regime", or_outside ? "1" : "0");
        ProjectionOptions po;
        po.allow_outside_regime = or_outside;
        const ProjectionReport rep = projection_lemma_check(or_d, or_n, or_trials, rng, po);
        write_header(*sink, "oracle", params, or_seed);
        write_csv(*sink, rep);
        log << summary(rep) << "\n";
        if (common.assert_mode)
          check(rep.both_ok * 100 >= 95 * rep.trials && rep.max_pythagoras_error <= 1e-6, "projection bounds");
      } else if (or_name == "scalar") {
        write_header(*sink, "oracle", params, or_seed);
        const ScalarLemmaReport rep = scalar_lemma_checks(rng);
        write_csv(*sink, rep);
        log << summary(rep) << "\n";
        if (common.assert_mode) check(rep.arccos_ok() && rep.sphere_all_ok() && rep.anti_all_ok(), "scalar lemmas");
      } else {
        throw ConfigError("unknown oracle '" + or_name + "' (matrix_var, rho, regression_floor, projection, scalar)");
      }
    };
  });

  // packing
  int pk_d = cfg.get_int("packing.d", 3);
  double pk_eps = cfg.get_double("packing.epsilon", 0.05);
  int pk_budget = cfg.get_int("packing.budget", 5000);
  long pk_verify = cfg.get_long("packing.verify_samples", 100000);
  std::uint64_t pk_seed = static_cast<std::uint64_t>(cfg.get_long("packing.seed", 1));
  auto* packing = app.add_subcommand("packing", "greedy rho-packing of rotations");
  packing->add_option("--d", pk_d);
  packing->add_option("--epsilon", pk_eps);
  packing->add_option("--budget", pk_budget);
  packing->add_option("--verify-samples", pk_verify);
  packing->add_option("--seed", pk_seed);
  packing->callback([&] {
    action = [&] {
      if (pk_budget < 1 || pk_verify < 2) throw ConfigError("packing: budget ≥ 1 and verify-samples ≥ 2");
      RngStream rng(pk_seed);
      RngStream build = rng.child(0), verify = rng.child(1);
      const PackingSet set = packing_construct(pk_d, pk_eps, pk_budget, build);
      const PackingVerification v = packing_verify(set, pk_verify, verify);
      RunParams params;
      params.set("d", std::to_string(pk_d));
      params.set("epsilon", format_double(pk_eps));
      params.set("budget", std::to_string(pk_budget));
      params.set("verify_samples", std::to_string(pk_verify));
      Sink sink(common.out_path, out);
      write_header(*sink, "packing", params, pk_seed);
      write_csv(*sink, set, v);
      log << summary(set, v) << "\n";
      if (common.assert_mode) check(v.all_certified(), "packing: uncertified pairs");
    };
  });

  // shatter
  int sh_d = cfg.get_int("shatter.d", 5);
  double sh_lambda = cfg.get_double("shatter.lambda", 1e-3);
  auto* shatter = app.add_subcommand("shatter", "exhaustive sign-pattern witnesses");
  shatter->add_option("--d", sh_d);
  shatter->add_option("--lambda", sh_lambda);
  shatter->callback([&] {
    action = [&] {
      const ShatterReport rep = shatter_all(sh_d, sh_lambda);
      RunParams params;
      params.set("d", std::to_string(sh_d));
      params.set("lambda", format_double(sh_lambda));
      Sink sink(common.out_path, out);
      write_header(*sink, "shatter", params, 0);
      write_csv_row(*sink, {"d", "patterns", "witnessed", "max_orthogonality_defect", "min_margin"});
      write_csv_row(*sink, {std::to_string(rep.d), std::to_string(rep.patterns), std::to_string(rep.witnessed),
                            format_double(rep.max_orthogonality_defect, 4), format_double(rep.min_margin, 6)});
      log << summary(rep) << "\n";
      if (common.assert_mode)
        check(rep.witnessed == rep.patterns && rep.max_orthogonality_defect <= 1e-10, "shatter: missing witnesses");
    };
  });

  // bayes
  BayesConfig bc;
  std::string bc_grid = cfg.get("bayes.n_grid", join(bc.n_grid));
  bc.d = cfg.get_int("bayes.d", bc.d);
  bc.trials = cfg.get_int("bayes.trials", bc.trials);
  bc.test_points = cfg.get_int("bayes.test_points", bc.test_points);
  bc.seed = static_cast<std::uint64_t>(cfg.get_long("bayes.seed", 1));
  auto* bayes = app.add_subcommand("bayes", "Bayes-optimal quadratic regression against the projector floor");
  bayes->add_option("--d", bc.d);
  bayes->add_option("--n-grid", bc_grid);
  bayes->add_option("--trials", bc.trials);
  bayes->add_option("--test-points", bc.test_points);
  bayes->add_option("--seed", bc.seed);
  bayes->callback([&] {
    action = [&] {
      bc.n_grid = parse_int_list(bc_grid);
      const BayesReport rep = run_bayes(bc);
      Sink sink(common.out_path, out);
      write_header(*sink, "bayes", bayes_params(bc), bc.seed);
      write_csv(*sink, rep);
      log << summary(rep) << "\n";
      if (common.assert_mode) check(rep.all_ok(), "bayes: floor or projector match failed");
    };
  });

  // plot
  std::string pl_in, pl_svg, pl_title = "mean test error";
  auto* plot = app.add_subcommand("plot", "SVG learning curves from a records CSV");
  plot->add_option("--in", pl_in, "records CSV written by sweep or figure1")->required();
  plot->add_option("--svg", pl_svg, "output SVG (default --out or stdout)");
  plot->add_option("--title", pl_title);
  plot->callback([&] {
    action = [&] {
      std::ifstream in(pl_in);
      if (!in) throw ConfigError("cannot open " + pl_in);
      std::ostringstream raw;
      raw << in.rdbuf();
      std::istringstream parse(raw.str());
      const auto points = summarize(read_records_csv(parse));
      std::vector<Series> series;
      for (const auto& p : points) {
        if (series.empty() || series.back().name != p.learner) series.push_back(Series{p.learner, {}, {}});
        series.back().x.push_back(p.n);
        series.back().y.push_back(p.mean);
      }
      RunParams params;
      params.set("in", pl_in);
      params.set("input_hash", hex64(fnv1a64(raw.str())));
      const auto body = [&](std::ostream& o) { write_svg_chart(o, pl_title, "training samples n", "mean test error", series); };
      const std::string target = pl_svg.empty() ? common.out_path : pl_svg;
      if (!target.empty()) {
        write_svg_file(target, "plot", params, 0, body);
      } else {
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- eqlab " << kToolVersion << " plot config_hash "
            << params.hash() << " seed 0 -->\n";
        body(out);
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    log << er.str();
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const Error& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (action) action();
  } catch (const AssertionFailed& e) {
    log << "assertion failed: " << e.what() << "\n";
    return kExitAssert;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  // Errors that escape run() come from reading config values into option defaults.
  try {
    return run(argc, argv, out, log);
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace eqlab
