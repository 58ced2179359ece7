#include <doctest.h>

#include <cmath>
#include <vector>

#include <switchback/design.hpp>
#include <switchback/errors.hpp>
#include <switchback/hac.hpp>
#include <switchback/regression.hpp>
#include <switchback/rng.hpp>
#include <switchback/simulation.hpp>

#include "oracles.hpp"

using namespace switchback;

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

}  // namespace

TEST_CASE("build_design unrolls the lag structure") {
  NormalizedPath zt{{10.0, 20.0, 30.0}};  // (a, b, c)
  LaggedDesign full = build_design(zt, 1, Variant::full);
  REQUIRE(full.X.rows() == 2);
  REQUIRE(full.X.cols() == 2);
  CHECK(full.X(0, 0) == 20.0);
  CHECK(full.X(0, 1) == 10.0);
  CHECK(full.X(1, 0) == 30.0);
  CHECK(full.X(1, 1) == 20.0);

  LaggedDesign inter = build_design(zt, 1, Variant::interaction);
  REQUIRE(inter.X.cols() == 3);
  CHECK(inter.X(0, 2) == 20.0 * 10.0);
  CHECK(inter.X(1, 2) == 30.0 * 20.0);

  LaggedDesign marg = build_design(zt, 1, Variant::marginal, 1);
  REQUIRE(marg.X.cols() == 1);
  CHECK(marg.X(0, 0) == 10.0);
  CHECK(marg.X(1, 0) == 20.0);

  CHECK_THROWS_AS(build_design(zt, 3, Variant::full), SpecError);
  CHECK_THROWS_AS(build_design(zt, 1, Variant::marginal, 2), SpecError);
}

TEST_CASE("variant column counts") {
  RegressionSpec spec;
  spec.K = 4;
  spec.variant = Variant::full;
  CHECK(variant_columns(spec) == 5);
  spec.variant = Variant::marginal;
  CHECK(variant_columns(spec) == 1);
  spec.variant = Variant::interaction;
  CHECK(variant_columns(spec) == 9);
  spec.variant = Variant::exposure;
  ExposureSpec ex;
  ex.boundaries = {1, 4};
  ex.tables = {{0, 1, 1, 1}, {0, 0, 0, 1, 0, 1, 1, 1}};
  spec.exposure = ex;
  CHECK(variant_columns(spec) == 2);
}

TEST_CASE("ols solves small systems exactly") {
  Eigen::MatrixXd X(2, 1);
  X << 1, 2;
  Eigen::VectorXd y(2);
  y << 2, 4;
  CHECK(ols_no_intercept(X, y).coef(0) == doctest::Approx(2.0).epsilon(1e-14));

  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd y2(2);
  y2 << 3, 7;
  Eigen::VectorXd c = ols_no_intercept(I, y2).coef;
  CHECK(c(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(c(1) == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("ols matches the normal-equations oracle on a random instance") {
  Rng rng(123);
  Eigen::MatrixXd X(8, 3);
  Eigen::VectorXd y(8);
  oracle::Mat xo = oracle::zeros(8, 3);
  oracle::Vec yo(8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 3; ++j) {
      X(i, j) = rng.normal(0.0, 1.0);
      xo[i][j] = X(i, j);
    }
    y(i) = rng.normal(0.0, 1.0);
    yo[i] = y(i);
  }
  OlsSolution sol = ols_no_intercept(X, y);
  oracle::Vec ref = oracle::lstsq(xo, yo);
  for (int j = 0; j < 3; ++j) CHECK(std::fabs(sol.coef(j) - ref[j]) < 1e-9);

  Eigen::VectorXd score = X.transpose() * (y - X * sol.coef);
  CHECK(score.norm() <= 1e-8 * (X.transpose() * y).norm());
  CHECK(sol.gram_condition >= 1.0);
}

TEST_CASE("ols names the offending column when rank deficient") {
  Eigen::MatrixXd X(5, 3);
  Rng rng(7);
  for (int i = 0; i < 5; ++i) {
    X(i, 0) = rng.normal(0.0, 1.0);
    X(i, 1) = rng.normal(0.0, 1.0);
    X(i, 2) = 2.0 * X(i, 0);
  }
  Eigen::VectorXd y = Eigen::VectorXd::Ones(5);
  CHECK_THROWS_WITH_AS(ols_no_intercept(X, y), doctest::Contains("column"), NumericError);

  Eigen::MatrixXd wide(2, 3);
  wide.setOnes();
  CHECK_THROWS_AS(ols_no_intercept(wide, Eigen::VectorXd::Ones(2)), NumericError);
}

TEST_CASE("rescale divides by the weights") {
  Eigen::VectorXd t1(1);
  t1 << 0.125;
  CHECK(rescale(t1, {0.25})(0) == doctest::Approx(0.5).epsilon(1e-14));

  Eigen::VectorXd t2(3);
  t2 << 1.5, -2.0, 0.25;
  Eigen::VectorXd r2 = rescale(t2, {1.0, 1.0, 1.0});
  CHECK(r2.isApprox(t2));

  Eigen::VectorXd t3(2);
  t3 << 0.1, 0.01;
  Eigen::VectorXd r3 = rescale(t3, {0.25, 0.0625});
  CHECK(r3(0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(r3(1) == doctest::Approx(0.16).epsilon(1e-12));

  CHECK_THROWS_AS(rescale(t3, {0.25, 0.0}), SpecError);
  CHECK_THROWS_AS(rescale(t3, {0.25}), SpecError);
}

TEST_CASE("estimate recovers a noiseless single-lag effect") {
  const int T = 60, K = 2;
  auto d = AssignmentDesign::bernoulli_constant(T, 0.5);
  TreatmentPath path = draw_assignment(d, 17);
  NormalizedPath zt = normalize(path, d);
  std::vector<double> y(T);
  for (int t = 0; t < T; ++t) y[t] = 2.0 * 0.25 * zt.z[t];

  RegressionSpec spec;
  spec.K = K;
  EstimateResult res = estimate(y, path, d, spec);
  CHECK(std::fabs(res.tau_hat(0) - 2.0) < 1e-9);
  CHECK(std::fabs(res.tau_hat(1)) < 1e-9);
  CHECK(std::fabs(res.tau_hat(2)) < 1e-9);
  CHECK(res.T == T);
  CHECK(res.K == K);
  CHECK(res.rows() == T - K);
}

TEST_CASE("estimate is consistent on the geometric AR design") {
  const int T = 10000, K = 5;
  ARPOModel model;
  model.phi = {0.5};
  model.mu1 = 0.5;
  model.mu0 = 0.0;
  model.eps = standard_normal_series(T, 99, 1.0);
  auto d = AssignmentDesign::bernoulli_constant(T, 0.5);
  TreatmentPath path = draw_assignment(d, 4);
  std::vector<double> y = simulate(model, path);

  RegressionSpec spec;
  spec.K = K;
  EstimateResult res = estimate(y, path, d, spec);
  attach_hac(res, HacConfig{});
  for (int k = 0; k <= K; ++k) {
    double truth = 0.5 * std::pow(0.5, k);
    double se = std::sqrt(std::max(res.vhat(k, k), 0.0) / res.rows());
    CHECK(std::fabs(res.tau_hat(k) - truth) <= 5.0 * se);
    CHECK(std::fabs(res.tau_hat(k) - truth) < 0.1);
  }
}

TEST_CASE("design-averaged moment vector vanishes") {
  // Average of (T-K)^{-1} X'(Y - X W tau) over every equally likely path.
  const int T = 8, K = 2;
  ARPOModel model;
  model.phi = {0.6};
  model.mu1 = 1.0;
  model.mu0 = -0.5;
  model.eps = {0.3, -0.1, 0.2, 0.05, -0.4, 0.1, 0.0, 0.25};
  auto d = AssignmentDesign::bernoulli_constant(T, 0.5);
  std::vector<double> w = lag_weights(d, K);
  TrueEffects effects = true_tau(PotentialOutcomeModel{model}, d, K);

  Eigen::VectorXd avg = Eigen::VectorXd::Zero(K + 1);
  oracle::for_each_path(oracle::Vec(T, 0.5), [&](const oracle::Vec& z, double prob) {
    TreatmentPath path{z};
    NormalizedPath zt = normalize(path, d);
    Eigen::MatrixXd X = build_design(zt, K, Variant::full).X;
    std::vector<double> y = simulate(PotentialOutcomeModel{model}, path);
    Eigen::VectorXd yk = to_eigen(y).tail(T - K);
    Eigen::VectorXd wtau(K + 1);
    for (int k = 0; k <= K; ++k) wtau(k) = w[k] * effects.tau(k);
    avg += prob * (X.transpose() * (yk - X * wtau)) / (T - K);
  });
  CHECK(avg.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("wls_lag0 hand values and marginal agreement") {
  auto d2 = AssignmentDesign::bernoulli_constant(2, 0.5);
  CHECK(wls_lag0({1.0, 0.0}, TreatmentPath{{1, 0}}, d2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(wls_lag0({0.0, 0.0}, TreatmentPath{{1, 0}}, d2) == 0.0);

  const int T = 50;
  auto d = AssignmentDesign::bernoulli_constant(T, 0.3);
  RegressionSpec spec;
  spec.K = 0;
  spec.variant = Variant::marginal;
  spec.marginal_lag = 0;
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    TreatmentPath path = draw_assignment(d, 100 + rep);
    std::vector<double> y(T);
    for (int t = 0; t < T; ++t) y[t] = 0.7 * path.z[t] + rng.normal(0.0, 1.0);
    EstimateResult res = estimate(y, path, d, spec);
    CHECK(std::fabs(wls_lag0(y, path, d) - res.tau_hat(0)) < 1e-12);
  }
}

TEST_CASE("gram matrix converges to the inverse weight matrix") {
  const int K = 2;
  std::vector<double> medians;
  for (int T : {200, 2000, 20000}) {
    auto d = AssignmentDesign::bernoulli_constant(T, 0.5);
    std::vector<double> errs;
    for (int rep = 0; rep < 200; ++rep) {
      NormalizedPath zt = normalize(draw_assignment(d, 1000 + rep), d);
      Eigen::MatrixXd X = build_design(zt, K, Variant::full).X;
      Eigen::MatrixXd G = X.transpose() * X / static_cast<double>(T - K);
      Eigen::MatrixXd target = Eigen::MatrixXd::Identity(K + 1, K + 1) * 4.0;
      errs.push_back((G - target).norm());
    }
    std::sort(errs.begin(), errs.end());
    medians.push_back(0.5 * (errs[99] + errs[100]));
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("path-averaged estimates are location invariant") {
  const int T = 6, K = 1;
  const double c = 3.7;
  auto d = AssignmentDesign::bernoulli_constant(T, 0.5);
  LinearPOModel model = LinearPOModel::homogeneous(T, {1.0, 0.5}, std::vector<double>(T, 0.0));

  Eigen::VectorXd base_avg = Eigen::VectorXd::Zero(K + 1);
  Eigen::VectorXd shift_avg = Eigen::VectorXd::Zero(K + 1);
  int base_ok = 0, shift_ok = 0;
  RegressionSpec spec;
  spec.K = K;
  oracle::for_each_path(oracle::Vec(T, 0.5), [&](const oracle::Vec& z, double) {
    TreatmentPath path{z};
    std::vector<double> y = simulate(PotentialOutcomeModel{model}, path);
    std::vector<double> ys = y;
    for (double& v : ys) v += c;
    bool ok_base = true, ok_shift = true;
    Eigen::VectorXd tau_base, tau_shift;
    try {
      tau_base = estimate(y, path, d, spec).tau_hat;
    } catch (const NumericError&) {
      ok_base = false;
    }
    try {
      tau_shift = estimate(ys, path, d, spec).tau_hat;
    } catch (const NumericError&) {
      ok_shift = false;
    }
    CHECK(ok_base == ok_shift);  // the singular paths do not depend on y
    if (ok_base) {
      base_avg += tau_base;
      ++base_ok;
    }
    if (ok_shift) {
      shift_avg += tau_shift;
      ++shift_ok;
    }
  });
  REQUIRE(base_ok == shift_ok);
  base_avg /= base_ok;
  shift_avg /= shift_ok;
  CHECK((base_avg - shift_avg).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("marginal and full estimates agree in design average") {
  // Y_t = a + b z~_{t-1}: both variants average to b / w_1 over all paths.
  const int T = 8, K = 1;
  const double a = 0.3, b = 1.2;
  auto d = AssignmentDesign::bernoulli_constant(T, 0.5);
  RegressionSpec full_spec;
  full_spec.K = K;
  RegressionSpec marg_spec;
  marg_spec.K = K;
  marg_spec.variant = Variant::marginal;
  marg_spec.marginal_lag = 1;

  double full_sum = 0.0, marg_sum = 0.0, weight_sum = 0.0;
  oracle::for_each_path(oracle::Vec(T, 0.5), [&](const oracle::Vec& z, double prob) {
    TreatmentPath path{z};
    NormalizedPath zt = normalize(path, d);
    std::vector<double> y(T, a);
    for (int t = 1; t < T; ++t) y[t] = a + b * zt.z[t - 1];
    double f, m;
    try {
      f = estimate(y, path, d, full_spec).tau_hat(1);
      m = estimate(y, path, d, marg_spec).tau_hat(0);
    } catch (const NumericError&) {
      return;
    }
    full_sum += prob * f;
    marg_sum += prob * m;
    weight_sum += prob;
  });
  full_sum /= weight_sum;
  marg_sum /= weight_sum;
  CHECK(std::fabs(full_sum - marg_sum) < 1e-10);
  CHECK(full_sum == doctest::Approx(b / 0.25).epsilon(1e-9));
}

TEST_CASE("residuals satisfy the defining identity") {
  const int T = 120, K = 3;
  auto d = AssignmentDesign::bernoulli_constant(T, 0.4);
  TreatmentPath path = draw_assignment(d, 31);
  std::vector<double> y(T);
  Rng rng(77);
  for (int t = 0; t < T; ++t) y[t] = path.z[t] + rng.normal(0.0, 1.0);

  RegressionSpec spec;
  spec.K = K;
  EstimateResult res = estimate(y, path, d, spec);
  Eigen::VectorXd yk = to_eigen(y).tail(T - K);
  Eigen::VectorXd expect = yk - res.X * res.tau_tilde;
  CHECK((res.residuals - expect).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + yk.cwiseAbs().maxCoeff()));
}

TEST_CASE("row scaling: unit h is a no-op and constant h rescales estimands") {
  const int T = 300, K = 2;
  auto d = AssignmentDesign::bernoulli_constant(T, 0.5);
  TreatmentPath path = draw_assignment(d, 12);
  std::vector<double> y(T);
  Rng rng(13);
  for (int t = 0; t < T; ++t)
    y[t] = path.z[t] + 0.4 * (t > 0 ? path.z[t - 1] : 0.0) + rng.normal(0.0, 0.3);

  RegressionSpec plain;
  plain.K = K;
  EstimateResult base = estimate(y, path, d, plain);

  RegressionSpec unit = plain;
  unit.h = std::vector<double>(T - K, 1.0);
  EstimateResult same = estimate(y, path, d, unit);
  CHECK((same.tau_hat.array() == base.tau_hat.array()).all());
  CHECK(same.weights == base.weights);

  // h_t = 2 targets 2 tau_k: tau_tilde halves, weights quarter, tau_hat doubles.
  RegressionSpec twos = plain;
  twos.h = std::vector<double>(T - K, 2.0);
  EstimateResult dbl = estimate(y, path, d, twos);
  for (int k = 0; k <= K; ++k) {
    CHECK(dbl.weights[k] == doctest::Approx(base.weights[k] / 4.0).epsilon(1e-13));
    CHECK(dbl.tau_hat(k) == doctest::Approx(2.0 * base.tau_hat(k)).epsilon(1e-10));
  }

  RegressionSpec bad = plain;
  bad.variant = Variant::marginal;
  bad.h = std::vector<double>(T - K, 1.0);
  CHECK_THROWS_AS(estimate(y, path, d, bad), SpecError);
}

TEST_CASE("constant p: normalized fit matches the intercept regression asymptotically") {
  const int T = 20000, K = 1;
  auto d = AssignmentDesign::bernoulli_constant(T, 0.5);
  TreatmentPath path = draw_assignment(d, 5);
  LinearPOModel model = LinearPOModel::homogeneous(T, {1.0, 0.5}, standard_normal_series(T, 6, 0.5));
  std::vector<double> y = simulate(PotentialOutcomeModel{model}, path);

  RegressionSpec spec;
  spec.K = K;
  EstimateResult res = estimate(y, path, d, spec);

  const int n = T - K;
  oracle::Mat X = oracle::zeros(n, K + 2);
  oracle::Vec yk(n);
  for (int r = 0; r < n; ++r) {
    X[r][0] = 1.0;
    for (int k = 0; k <= K; ++k) X[r][k + 1] = path.z[K + r - k];
    yk[r] = y[K + r];
  }
  oracle::Vec with_intercept = oracle::lstsq(X, yk);
  for (int k = 0; k <= K; ++k) CHECK(std::fabs(res.tau_hat(k) - with_intercept[k + 1]) < 0.02);
}

TEST_CASE("estimate validates its inputs") {
  auto d = AssignmentDesign::bernoulli_constant(10, 0.5);
  TreatmentPath path = draw_assignment(d, 1);
  std::vector<double> y(10, 0.0);
  RegressionSpec spec;
  spec.K = 10;
  CHECK_THROWS_AS(estimate(y, path, d, spec), SpecError);
  spec.K = 2;
  CHECK_THROWS_AS(estimate(std::vector<double>(9, 0.0), path, d, spec), SpecError);

  RegressionSpec ex;
  ex.K = 2;
  ex.variant = Variant::exposure;
  ExposureSpec mapping;
  mapping.boundaries = {1};  // ends at 1, not K=2
  mapping.tables = {{0, 1, 1, 1}};
  ex.exposure = mapping;
  CHECK_THROWS_AS(estimate(y, path, d, ex), SpecError);

  auto dc = AssignmentDesign::continuous_moments(std::vector<double>(10, 0.0),
                                                 std::vector<double>(10, 1.0));
  RegressionSpec inter;
  inter.K = 1;
  inter.variant = Variant::interaction;
  TreatmentPath cpath{std::vector<double>(10, 0.5)};
  CHECK_THROWS_AS(estimate(y, cpath, dc, inter), SpecError);
}
