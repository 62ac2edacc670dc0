#include <cmath>
#include <sstream>

#include "doctest.h"
#include "eqlab/core/error.hpp"
#include "eqlab/oracles/oracles.hpp"

using namespace eqlab;

TEST_CASE("accumulator standard error matches the sample formula") {
  McAccumulator acc;
  CHECK_THROWS_AS(acc.estimate(0), PreconditionError);
  for (double x : {1.0, 2.0, 3.0, 4.0}) acc.add(x);
  const McEstimate e = acc.estimate(9);
  CHECK(e.mean == doctest::Approx(2.5));
  CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.samples == 4);
  CHECK(e.seed == 9);
}

TEST_CASE("standard errors shrink like samples^(-1/2)") {
  RngStream rng(1);
  const Matrix m = gaussian_matrix(4, 4, rng);
  const Matrix u = haar_orthogonal(4, rng).matrix(), v = haar_orthogonal(4, rng).matrix();
  RngStream a(2), b(2), c(3), e(3), f(4), g(4);
  const double r1 = matrix_var_mc(m, 4000, a).se / matrix_var_mc(m, 64000, b).se;
  const double r2 = rho_empirical(u, v, 4000, c).se / rho_empirical(u, v, 64000, e).se;
  const double r3 = rho_arccos(u, v, 4000, f).se / rho_arccos(u, v, 64000, g).se;
  for (double r : {r1, r2, r3}) {
    CHECK(r >= 4.0 * 0.8);
    CHECK(r <= 4.0 * 1.2);
  }
}

TEST_CASE("wilson bounds and quantiles") {
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536).epsilon(1e-6));
  CHECK(normal_quantile(0.9995) == doctest::Approx(3.2905267).epsilon(1e-6));
  CHECK(wilson_lower(0, 100, 1.96) == 0.0);
  CHECK(wilson_upper(100, 100, 1.96) == doctest::Approx(1.0).epsilon(1e-12));
  const double lo = wilson_lower(30, 100, 1.96), hi = wilson_upper(30, 100, 1.96);
  CHECK(lo == doctest::Approx(0.2189).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.3958).epsilon(1e-3));
  CHECK_THROWS_AS(wilson_lower(5, 4, 1.0), PreconditionError);
}

TEST_CASE("rho examples") {
  RngStream rng(5);
  const Matrix u = haar_orthogonal(5, rng).matrix();
  RngStream r1(6), r2(6);
  CHECK(rho_empirical(u, u, 10000, r1).mean == 0.0);
  CHECK(rho_arccos(u, u, 10000, r2).mean <= 1e-7);

  Matrix one(1, 1), minus(1, 1);
  one << 1.0;
  minus << -1.0;
  RngStream r3(7), r4(7);
  CHECK(rho_empirical(one, minus, 1000, r3).mean == 1.0);
  CHECK(rho_arccos(one, minus, 1000, r4).mean == 1.0);
}

TEST_CASE("rho estimators agree on random rotations") {
  RngStream rng(8);
  for (int k = 0; k < 3; ++k) {
    const Matrix u = haar_orthogonal(6, rng).matrix(), v = haar_orthogonal(6, rng).matrix();
    const McEstimate a = rho_empirical(u, v, 200000, rng);
    const McEstimate b = rho_arccos(u, v, 200000, rng);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * (a.se + b.se));
  }
}

TEST_CASE("rho_arccos is exactly symmetric under a shared seed") {
  RngStream rng(9);
  const Matrix u = haar_orthogonal(4, rng).matrix(), v = haar_orthogonal(4, rng).matrix();
  RngStream a(10), b(10);
  CHECK(rho_arccos(u, v, 5000, a).mean == rho_arccos(v, u, 5000, b).mean);
}

TEST_CASE("matrix variance closed form examples and invariants") {
  CHECK(matrix_var_closed(Matrix::Identity(8, 8)) == 80.0);
  for (int d = 1; d <= 6; ++d) CHECK(matrix_var_closed(Matrix::Identity(d, d)) == d * d + 2.0 * d);

  RngStream rng(11);
  // Dyadic entries keep every sum exact.
  Matrix m(5, 5), k = Matrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) m(i, j) = static_cast<double>(static_cast<int>(rng.below(33)) - 16) / 8.0;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      k(i, j) = static_cast<double>(static_cast<int>(rng.below(17)) - 8) / 4.0;
      k(j, i) = -k(i, j);
    }
  CHECK(matrix_var_closed(m) == matrix_var_closed(m.transpose()));
  CHECK(matrix_var_closed(m + k) == matrix_var_closed(m));
  CHECK(matrix_var_closed(k) == 0.0);

  const McEstimate skew = matrix_var_mc(k, 5000, rng);
  CHECK(std::abs(skew.mean) <= 4.0 * skew.se);
  CHECK(skew.mean == 0.0);
}

TEST_CASE("matrix variance Monte Carlo agrees with the closed form") {
  RngStream rng(12);
  for (int t = 0; t < 3; ++t) {
    const Matrix m = gaussian_matrix(8, 8, rng);
    const McEstimate e = matrix_var_mc(m, 200000, rng);
    CHECK(std::abs(e.mean - matrix_var_closed(m)) <= 4.0 * e.se);
  }
  const McEstimate id = matrix_var_mc(Matrix::Identity(3, 3), 200000, rng);
  CHECK(std::abs(id.mean - 15.0) <= 4.0 * id.se);
}

TEST_CASE("regression floor examples") {
  CHECK(regression_floor(6, 0) == 42.0);
  CHECK(regression_floor(6, 21) == 0.0);
  CHECK(regression_floor(6, 30) == 0.0);
  CHECK(regression_floor(5, 7) == 16.0);
  CHECK_THROWS_AS(regression_floor(5, -1), PreconditionError);
  RngStream rng(13);
  const McEstimate zero = regression_floor_mc(6, 0, 40000, rng);
  CHECK(std::abs(zero.mean - 48.0) <= 4.0 * zero.se);
  CHECK(zero.mean >= 42.0);
  const McEstimate seven = regression_floor_mc(5, 7, 20000, rng);
  CHECK(seven.mean >= 16.0 - 3.0 * seven.se);
  // Past the symmetric dimension the complement vanishes.
  CHECK(regression_floor_mc(3, 6, 50, rng).mean <= 1e-18);
}

TEST_CASE("packing construction and verification") {
  RngStream a(21), b(21);
  const PackingSet fine = packing_construct(3, 0.05, 1500, a);
  const PackingSet coarse = packing_construct(3, 0.10, 1500, b);
  CHECK(fine.size() > coarse.size());
  CHECK(fine.pair_rho.size() == static_cast<size_t>(fine.size() * (fine.size() - 1) / 2));
  for (const Matrix& u : fine.elements) CHECK(orthogonality_defect(u) <= 1e-10);
  for (size_t i = 0; i < fine.pair_lcb.size(); ++i) CHECK(fine.pair_lcb[i] >= fine.epsilon);
  for (size_t i = 0; i < fine.exponents.size(); ++i) {
    CHECK(skew_defect(fine.exponents[i]) == 0.0);
    CHECK(Eigen::JacobiSVD<Matrix>(fine.exponents[i]).singularValues()(0) <= M_PI / 4.0 + 1e-12);
  }
  RngStream v(22);
  const PackingVerification ver = packing_verify(fine, 50000, v);
  CHECK(ver.pairs == static_cast<int>(fine.pair_rho.size()));
  CHECK(ver.all_certified());
  CHECK(ver.min_lcb >= 0.05);
  std::ostringstream csv;
  write_csv(csv, fine, ver);
  CHECK(csv.str().rfind("i,j,rho,se,construct_lcb\n", 0) == 0);
  CHECK(summary(fine, ver).find("verified") != std::string::npos);
}

TEST_CASE("packing degenerate and invalid inputs") {
  RngStream rng(23);
  const PackingSet one = packing_construct(3, 0.99, 200, rng);
  CHECK(one.size() == 1);
  CHECK(one.pair_rho.empty());
  CHECK_THROWS_AS(packing_construct(3, 0.0, 10, rng), PreconditionError);
  CHECK_THROWS_AS(packing_construct(3, 1.0, 10, rng), PreconditionError);
  CHECK_THROWS_AS(packing_construct(1, 0.1, 10, rng), PreconditionError);
  CHECK_THROWS_AS(packing_construct(3, 0.1, 0, rng), PreconditionError);
}

TEST_CASE("shatter witnesses") {
  const Matrix plus = shatter_witness({1, 1, 1}, 1e-3).matrix();
  CHECK(plus(0, 1) > 0);
  CHECK(plus(0, 2) > 0);
  CHECK(plus(1, 2) > 0);

  const std::vector<int> sigma = {1, -1, 1, 1, -1, -1, 1, -1, 1, 1};
  std::vector<int> neg(sigma.size());
  for (size_t i = 0; i < sigma.size(); ++i) neg[i] = -sigma[i];
  const Matrix w = shatter_witness(sigma, 1e-3).matrix();
  const Matrix wn = shatter_witness(neg, 1e-3).matrix();
  CHECK((w - wn.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  const ShatterReport rep = shatter_all(5, 1e-3);
  CHECK(rep.patterns == 1024);
  CHECK(rep.witnessed == 1024);
  CHECK(rep.max_orthogonality_defect <= 1e-10);
  CHECK(rep.min_margin > 0.0);
  for (int d = 2; d <= 6; ++d) CHECK(shatter_all(d, 1e-3).witnessed == (1L << (d * (d - 1) / 2)));

  CHECK_THROWS_AS(shatter_witness({1, 1, 1, 1, 1, 1}, 3.0), PreconditionError);
  CHECK_THROWS_AS(shatter_witness({1, 1}, 1e-3), DimensionError);
  CHECK_THROWS_AS(shatter_witness({1, 0, 1}, 1e-3), PreconditionError);
  CHECK_THROWS_AS(shatter_witness({1, 1, 1}, 0.0), PreconditionError);
}

TEST_CASE("projection lemma check") {
  RngStream rng(31);
  const ProjectionReport empty = projection_lemma_check(20, 0, 5, rng);
  for (double v : empty.inside) CHECK(v == 0.0);
  CHECK(empty.upper_ok == 5);

  CHECK(projection_regime_limit(40, 0.01) == doctest::Approx(1600.0 / (12.0 * std::pow(std::log(4000.0), 2))));
  CHECK_THROWS_AS(projection_lemma_check(40, 10, 5, rng), PreconditionError);
  CHECK_THROWS_AS(projection_lemma_check(10, 0, 5, rng), PreconditionError);

  ProjectionOptions opt;
  opt.allow_outside_regime = true;
  const ProjectionReport r = projection_lemma_check(40, 10, 30, rng, opt);
  CHECK_FALSE(r.in_regime);
  CHECK(r.max_pythagoras_error <= 1e-6);
  CHECK(r.upper_ok == 30);
  CHECK(r.inside.size() == 30);
  CHECK(r.upper_bound == doctest::Approx(1600.0 / 3.0 + 200.0));
  CHECK(r.lower_bound == doctest::Approx(3200.0 / 3.0 - 200.0));
  // ‖x‖⁴ fluctuates at scale d^{3/2}; the lower bound is not expected in every trial.
  CHECK(r.lower_ok >= 15);
  std::ostringstream csv;
  write_csv(csv, r);
  CHECK(csv.str().rfind("trial,d,n,inside,outside", 0) == 0);
  CHECK(summary(r).find("outside the stated regime") != std::string::npos);
}

TEST_CASE("scalar lemma checks") {
  RngStream rng(41);
  ScalarLemmaOptions opt;
  opt.arccos_points = 100000;
  opt.sphere_matrices = 9;
  opt.sphere_samples = 5000;
  opt.gaussian_samples = 50000;
  const ScalarLemmaReport rep = scalar_lemma_checks(rng, opt);
  CHECK(rep.arccos_ok());
  CHECK(rep.arccos_min_ratio <= std::sqrt(2.0) + 1e-6);
  CHECK(rep.sphere_all_ok());
  CHECK(rep.sphere_empirical_c > 0.0);
  CHECK(rep.sphere_empirical_c <= 1.0);
  CHECK(rep.anti_all_ok());
  CHECK(rep.anti_ok_loose == rep.z_tested);

  const double x = 1.0 - 1e-9;
  CHECK(std::acos(x) / std::sqrt(1.0 - x) >= std::sqrt(2.0) - 1e-4);
  for (int d : {2, 5, 16}) {
    RngStream r(42);
    const McEstimate e = sphere_norm_mc(Matrix::Identity(d, d), 1000, r);
    CHECK(std::abs(e.mean - 1.0) <= 1e-12);
  }
  std::ostringstream csv;
  write_csv(csv, rep);
  CHECK(csv.str().find("arccos_min_ratio") != std::string::npos);
}
