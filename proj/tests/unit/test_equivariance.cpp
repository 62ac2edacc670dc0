#include <sstream>

#include "doctest.h"
#include "eqlab/core/error.hpp"
#include "eqlab/equivariance/equivariance.hpp"
#include "eqlab/training/iterative.hpp"

using namespace eqlab;

namespace {

LabeledSet toy_data(int d, int n, RngStream& rng) {
  Matrix x = gaussian_matrix(d, n, rng);
  Vector y(n);
  for (int i = 0; i < n; ++i) y(i) = sign_label(x(0, i) * x(1, i) + 0.3 * x(2, i));
  return LabeledSet(x, y);
}

std::vector<GroupElement> draws(GroupKind k, int d, int count, RngStream& rng) {
  std::vector<GroupElement> gs;
  for (int i = 0; i < count; ++i) gs.push_back(sample_group(k, d, rng));
  return gs;
}

CoupledConfig fc_config(std::vector<int> widths, Activation act, UpdateRule rule) {
  CoupledConfig c;
  c.arch = FCShape{std::move(widths), act};
  c.init = InitSpec::gaussian(0.3);
  c.rule = rule;
  return c;
}

}  // namespace

TEST_CASE("identity group element passes the coupled check at 1e-12 for every rule") {
  RngStream rng(11);
  const LabeledSet data = toy_data(6, 12, rng);
  const Matrix test = gaussian_matrix(6, 10, rng);
  std::vector<UpdateRule> rules = {UpdateRule::gd(0.005, 20), UpdateRule::momentum(0.002, 0.9, 20),
                                   UpdateRule::lp_reg(0.005, 1.0, 0.1, 20), UpdateRule::adam(0.01, 20),
                                   UpdateRule::adagrad(0.05, 20)};
  for (const auto& r : rules) {
    CoupledConfig c = fc_config({6, 6, 1}, Activation::Quadratic, r);
    c.threshold = 1e-12;
    const auto rep = check_coupled(c, data, {GroupElement::identity(6)}, test, rng);
    CHECK_MESSAGE(rep.passed(), describe(r));
    CHECK(rep.max_discrepancy <= 1e-12);
  }
  CoupledConfig c = fc_config({6, 1, 1}, Activation::Identity, UpdateRule::newton(0.5, 5));
  c.loss = Loss::Squared;
  c.init = InitSpec::zero_first_layer(0.5);
  c.threshold = 1e-12;
  CHECK(check_coupled(c, data, {GroupElement::identity(6)}, test, rng).passed());
}

TEST_CASE("gd on a depth-3 quadratic network is orthogonally equivariant") {
  RngStream rng(12);
  const LabeledSet data = toy_data(8, 20, rng);
  const Matrix test = gaussian_matrix(8, 16, rng);
  const auto rep = check_coupled(fc_config({8, 8, 8, 1}, Activation::Quadratic, UpdateRule::gd(0.002, 50)), data,
                                 draws(GroupKind::Orthogonal, 8, 5, rng), test, rng);
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.max_discrepancy <= 1e-6);
  CHECK(rep.discrepancies.size() == 5);
  CHECK(rep.seeds.size() == 5);
  CHECK(rep.mode == CheckMode::Coupled);
  CHECK(rep.group == GroupKind::Orthogonal);
}

TEST_CASE("newton from a zero first layer is general-linear equivariant") {
  RngStream rng(13);
  const LabeledSet data = toy_data(8, 20, rng);
  const Matrix test = gaussian_matrix(8, 16, rng);
  CoupledConfig c = fc_config({8, 1, 1}, Activation::Identity, UpdateRule::newton(0.5, 10));
  c.loss = Loss::Squared;
  c.init = InitSpec::zero_first_layer(0.5);
  c.threshold = 1e-5;
  std::vector<GroupElement> gs;
  for (int i = 0; i < 5; ++i) gs.push_back(random_general_linear(8, 10.0, rng));
  const auto rep = check_coupled(c, data, gs, test, rng);
  CHECK(rep.passed());
}

TEST_CASE("adam is not orthogonally equivariant") {
  RngStream rng(14);
  const LabeledSet data = toy_data(8, 20, rng);
  const Matrix test = gaussian_matrix(8, 16, rng);
  const auto rep = check_coupled(fc_config({8, 8, 1}, Activation::Quadratic, UpdateRule::adam(0.01, 30)), data,
                                 draws(GroupKind::Orthogonal, 8, 20, rng), test, rng);
  CHECK(rep.verdict == Verdict::Fail);
  CHECK(rep.fail_count > 10);
}

TEST_CASE("coupled verdicts follow the thresholds") {
  RngStream rng(15);
  const LabeledSet data = toy_data(6, 10, rng);
  const Matrix test = gaussian_matrix(6, 8, rng);
  CoupledConfig c = fc_config({6, 4, 1}, Activation::Quadratic, UpdateRule::adam(0.01, 10));
  const auto gs = draws(GroupKind::Orthogonal, 6, 6, rng);
  const auto rep = check_coupled(c, data, gs, test, rng);
  for (double v : rep.discrepancies) CHECK((rep.passed() ? v <= rep.threshold : true));
  if (!rep.passed()) {
    bool some_above = false;
    for (double v : rep.discrepancies) some_above = some_above || v > rep.threshold;
    CHECK(some_above);
  }
  // An impossible fail band forces the inconclusive path and one extended run.
  c.fail_threshold = 1e9;
  const auto inc = check_coupled(c, data, gs, test, rng);
  CHECK(inc.verdict == Verdict::Inconclusive);
  CHECK(inc.steps == 20);
}

TEST_CASE("coupled checks reject models without a weight action") {
  RngStream rng(16);
  const LabeledSet data = toy_data(8, 6, rng);
  CoupledConfig c;
  c.arch = CNNGeometry{8, 4, 2, 1, Pooling::SumOfSquares};
  c.rule = UpdateRule::gd(0.01, 5);
  CHECK_THROWS_AS(check_coupled(c, data, {GroupElement::identity(8)}, gaussian_matrix(8, 3, rng), rng),
                  PreconditionError);
  CHECK_THROWS_AS(check_step_invariance(c.rule, c.arch, Vector::Zero(num_params(c.arch)), data,
                                        GroupElement::identity(8), Loss::Logistic),
                  PreconditionError);
  CoupledConfig f = fc_config({8, 2, 1}, Activation::Quadratic, UpdateRule::gd(0.01, 5));
  CHECK_THROWS_AS(check_coupled(f, data, {GroupElement::identity(5)}, gaussian_matrix(8, 3, rng), rng),
                  DimensionError);
}

TEST_CASE("single-step invariance examples") {
  RngStream rng(17);
  const LabeledSet data = toy_data(6, 15, rng);
  const GroupElement q = haar_orthogonal(6, rng);
  const Architecture linear = FCShape{{6, 1}, Activation::Identity};
  const Vector w = gaussian_vector(6, rng);
  CHECK(check_step_invariance(UpdateRule::gd(0.1, 1), linear, w, data, q, Loss::Logistic) <= 1e-12);

  const Architecture net = FCShape{{6, 5, 1}, Activation::Relu};
  const Vector theta = gaussian_vector(num_params(net), rng);
  CHECK(check_step_invariance(UpdateRule::lp_reg(0.1, 2.0, 0.5, 1), net, theta, data, q, Loss::Logistic) <= 1e-12);
  CHECK(check_step_invariance(UpdateRule::lp_reg(0.1, 1.0, 0.5, 1), net, theta, data, q, Loss::Logistic) > 1e-3);
  const GroupElement p = uniform_permutation(6, rng);
  CHECK(check_step_invariance(UpdateRule::adagrad(0.1, 1), net, theta, data, p, Loss::Logistic) <= 1e-12);
  CHECK(check_step_invariance(UpdateRule::lp_reg(0.1, 1.0, 0.5, 1), net, theta, data, p, Loss::Logistic) <= 1e-12);
}

TEST_CASE("stepwise reports separate l1 from l2 regularization under rotations") {
  RngStream rng(18);
  const LabeledSet data = toy_data(8, 20, rng);
  const Matrix test = gaussian_matrix(8, 8, rng);
  const auto gs = draws(GroupKind::Orthogonal, 8, 4, rng);
  CoupledConfig l2 = fc_config({8, 8, 1}, Activation::Quadratic, UpdateRule::lp_reg(0.005, 2.0, 1.0, 20));
  const auto pass = check_stepwise(l2, data, gs, test, rng);
  CHECK(pass.passed());
  CHECK(pass.mode == CheckMode::Stepwise);
  CoupledConfig l1 = fc_config({8, 8, 1}, Activation::Quadratic, UpdateRule::lp_reg(0.005, 1.0, 4.0, 20));
  const auto fail = check_stepwise(l1, data, gs, test, rng);
  CHECK(fail.verdict == Verdict::Fail);
  const auto perm = check_stepwise(l1, data, draws(GroupKind::Permutation, 8, 4, rng), test, rng);
  CHECK(perm.passed());
}

TEST_CASE("coupled equivariance is closed under composition") {
  RngStream rng(19);
  const LabeledSet data = toy_data(6, 12, rng);
  const Matrix test = gaussian_matrix(6, 8, rng);
  const CoupledConfig c = fc_config({6, 6, 1}, Activation::Quadratic, UpdateRule::momentum(0.002, 0.9, 25));
  for (int pair = 0; pair < 3; ++pair) {
    const GroupElement a = haar_orthogonal(6, rng), b = haar_orthogonal(6, rng);
    REQUIRE(check_coupled(c, data, {a, b}, test, rng).passed());
    CHECK(check_coupled(c, data, {compose(a, b)}, test, rng).passed());
  }
  const GroupElement p = uniform_permutation(6, rng), s = uniform_sign_flip(6, rng);
  const CoupledConfig ad = fc_config({6, 6, 1}, Activation::Quadratic, UpdateRule::adam(0.01, 25));
  REQUIRE(check_coupled(ad, data, {p, s}, test, rng).passed());
  CHECK(check_coupled(ad, data, {compose(p, s)}, test, rng).passed());
}

namespace {

Learner fc_gd_learner(InitSpec init) {
  Learner l;
  l.name = "fc-gd";
  l.fit = [init](const LabeledSet& data, RngStream& rng) {
    const Architecture arch = FCShape{{data.dim(), 4, 1}, Activation::Quadratic};
    return run_iterative(arch, init, UpdateRule::gd(0.01, 10), data, rng, Loss::Logistic).predictor;
  };
  return l;
}

}  // namespace

TEST_CASE("distributional check basics") {
  RngStream rng(20);
  const LabeledSet data = toy_data(4, 10, rng);
  const Matrix test = gaussian_matrix(4, 6, rng);
  Learner det;
  det.name = "det";
  det.fit = [](const LabeledSet& d, RngStream&) {
    const Vector w = d.points * d.labels;
    return Predictor([w](const Matrix& x) -> Vector { return x.transpose() * w; }, DecisionMode::Sign);
  };
  const auto rep = check_distributional(det, data, GroupElement::identity(4), test, 50, rng);
  CHECK(rep.passed());
  CHECK(rep.max_discrepancy == 0.0);
  CHECK(rep.mode == CheckMode::Distributional);
  CHECK(rep.threshold > 2.5);
  CHECK_THROWS_AS(check_distributional(det, data, GroupElement::identity(4), test, 49, rng), PreconditionError);
}

TEST_CASE("symmetrized learners pass and anisotropic initialization fails the distributional check") {
  RngStream rng(21);
  const LabeledSet data = toy_data(4, 10, rng);
  const Matrix test = gaussian_matrix(4, 8, rng);
  const GroupElement g = haar_orthogonal(4, rng);

  InitSpec aniso = InitSpec::gaussian(0.5);
  aniso.input_scales = Vector::Zero(4);
  aniso.input_scales(0) = 1.0;
  const Learner bad = fc_gd_learner(aniso);
  const auto sym = check_distributional(symmetrized(bad, GroupSampler::haar()), data, g, test, 200, rng);
  CHECK(sym.passed());
  const auto fail = check_distributional(bad, data, g, test, 200, rng);
  CHECK(fail.verdict == Verdict::Fail);
  CHECK(fail.fail_count > 0);
}

TEST_CASE("distributional false-positive rate on an equivariant learner") {
  RngStream rng(22);
  const Learner fair = fc_gd_learner(InitSpec::gaussian(0.5));
  int rejections = 0;
  for (int meta = 0; meta < 100; ++meta) {
    RngStream r = rng.child(meta);
    const LabeledSet data = toy_data(4, 8, r);
    const Matrix test = gaussian_matrix(4, 4, r);
    rejections += !check_distributional(fair, data, haar_orthogonal(4, r), test, 50, r).passed();
  }
  CHECK(rejections <= 5);
}

TEST_CASE("table grid matches the expected placement") {
  const auto cells = table_grid();
  CHECK(cells.size() == 13);
  for (const auto& c : cells) {
    INFO(c.rule << " " << c.group << " " << c.regularizer);
    CHECK(c.report.verdict == (c.expected_pass ? Verdict::Pass : Verdict::Fail));
  }
  for (size_t i = 1; i < cells.size(); ++i) CHECK(cells[i - 1].rule <= cells[i].rule);
  std::ostringstream csv;
  write_grid_csv(csv, cells);
  std::string header;
  std::istringstream in(csv.str());
  std::getline(in, header);
  CHECK(header == "rule,group,init,regularizer,mode,discrepancy,verdict,seed");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 13);
  // Determinism.
  std::ostringstream again;
  write_grid_csv(again, table_grid());
  CHECK(again.str() == csv.str());
}
