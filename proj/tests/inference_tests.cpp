#include <doctest.h>

#include <cmath>
#include <vector>

#include <switchback/design.hpp>
#include <switchback/errors.hpp>
#include <switchback/inference.hpp>
#include <switchback/rng.hpp>
#include <switchback/stats.hpp>

#include "oracles.hpp"

using namespace switchback;

namespace {

// Fabricates a result with the fields inference reads: tau_hat, vhat, T, K.
EstimateResult fake_result(const std::vector<double>& tau, const std::vector<double>& se, int n) {
  EstimateResult res;
  const int P = static_cast<int>(tau.size());
  res.tau_hat = Eigen::Map<const Eigen::VectorXd>(tau.data(), P);
  res.tau_tilde = res.tau_hat;
  res.vhat = Eigen::MatrixXd::Zero(P, P);
  for (int j = 0; j < P; ++j) res.vhat(j, j) = se[j] * se[j] * n;
  res.T = n;
  res.K = 0;
  res.weights = std::vector<double>(P, 1.0);
  return res;
}

}  // namespace

TEST_CASE("confidence intervals against the pinned normal quantile") {
  EstimateResult res = fake_result({0.5, 0.0}, {0.1, 0.2}, 100);
  std::vector<LagInference> ci = confidence_intervals(res, 0.95);
  REQUIRE(ci.size() == 2);
  CHECK(ci[0].se == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(ci[0].ci_low == doctest::Approx(0.5 - oracle::kNormalQ975 * 0.1).epsilon(1e-12));
  CHECK(ci[0].ci_high == doctest::Approx(0.5 + oracle::kNormalQ975 * 0.1).epsilon(1e-12));
  CHECK(ci[0].ci_low == doctest::Approx(0.30400).epsilon(1e-4));
  CHECK(ci[0].ci_high == doctest::Approx(0.69600).epsilon(1e-4));
  CHECK(ci[0].p < 1e-5);

  CHECK(ci[1].estimate == 0.0);
  CHECK(ci[1].p == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ci[1].ci_low == doctest::Approx(-ci[1].ci_high).epsilon(1e-12));

  CHECK_THROWS_AS(confidence_intervals(res, 0.0), SpecError);
  CHECK_THROWS_AS(confidence_intervals(res, 1.0), SpecError);
}

TEST_CASE("doubling the standard error raises the p-value") {
  EstimateResult narrow = fake_result({0.3}, {0.1}, 50);
  EstimateResult wide = fake_result({0.3}, {0.2}, 50);
  double p1 = confidence_intervals(narrow, 0.95)[0].p;
  double p2 = confidence_intervals(wide, 0.95)[0].p;
  CHECK(p1 < p2);
  CHECK(p2 < 1.0);
}

TEST_CASE("degenerate standard errors resolve by the estimate") {
  EstimateResult res = fake_result({0.5, 0.0}, {0.0, 0.0}, 10);
  std::vector<LagInference> ci = confidence_intervals(res, 0.95);
  CHECK(ci[0].degenerate);
  CHECK(ci[0].p == 0.0);
  CHECK(ci[1].degenerate);
  CHECK(ci[1].p == 1.0);
  CHECK(ci[1].ci_low == 0.0);
  CHECK(ci[1].ci_high == 0.0);
}

TEST_CASE("narrower levels nest") {
  EstimateResult res = fake_result({0.4}, {0.15}, 80);
  LagInference c95 = confidence_intervals(res, 0.95)[0];
  LagInference c99 = confidence_intervals(res, 0.99)[0];
  CHECK(c99.ci_low < c95.ci_low);
  CHECK(c95.ci_high < c99.ci_high);
  CHECK(c95.ci_low < c95.estimate);
  CHECK(c95.estimate < c95.ci_high);
}

TEST_CASE("wald test hand values") {
  EstimateResult zero = fake_result({0.0, 0.0}, {0.1, 0.1}, 100);
  WaldResult wz = wald_test(zero, {0, 1});
  CHECK(wz.statistic == 0.0);
  CHECK(wz.df == 2);
  CHECK(wz.p == doctest::Approx(1.0).epsilon(1e-12));

  // n tau^2 / vhat = 100 * 0.0384 / 1 = 3.84 exactly.
  EstimateResult chi = fake_result({std::sqrt(0.0384)}, {0.1}, 100);
  chi.vhat(0, 0) = 1.0;
  WaldResult wc = wald_test(chi, {0});
  CHECK(wc.statistic == doctest::Approx(3.84).epsilon(1e-12));
  CHECK(wc.df == 1);
  CHECK(wc.p == doctest::Approx(oracle::kChi2Tail384Df1).epsilon(1e-12));
}

TEST_CASE("single-coefficient wald equals the squared z statistic") {
  EstimateResult res = fake_result({0.37}, {0.21}, 64);
  WaldResult w = wald_test(res, {0});
  LagInference ci = confidence_intervals(res, 0.95)[0];
  double z = ci.estimate / ci.se;
  CHECK(std::fabs(w.statistic - z * z) < 1e-12);
  CHECK(std::fabs(w.p - ci.p) < 1e-10);
}

TEST_CASE("wald test rejects bad subsets and singular blocks") {
  EstimateResult res = fake_result({0.1, 0.2}, {0.1, 0.1}, 50);
  CHECK_THROWS_AS(wald_test(res, {}), SpecError);
  CHECK_THROWS_AS(wald_test(res, {2}), SpecError);
  CHECK_THROWS_AS(wald_test(res, {0, 0}), SpecError);

  EstimateResult sing = fake_result({0.1, 0.2}, {0.1, 0.1}, 50);
  sing.vhat.setOnes();
  CHECK_THROWS_WITH_AS(wald_test(sing, {0, 1}), doctest::Contains("drop lags"), NumericError);
  // The single-lag test still works on the same block.
  CHECK(wald_test(sing, {0}).df == 1);
}

TEST_CASE("frt p-value formula and monotone invariance") {
  CHECK(frt_pvalue(1.0, {}) == 1.0);
  CHECK(frt_pvalue(2.0, {1.0, 3.0, 2.0}) == doctest::Approx(3.0 / 4.0).epsilon(1e-14));

  std::vector<double> resampled = {0.3, 1.7, 0.9, 2.4, 0.1};
  double base = frt_pvalue(1.0, resampled);
  std::vector<double> mapped;
  for (double s : resampled) mapped.push_back(std::exp(s));
  CHECK(frt_pvalue(std::exp(1.0), mapped) == base);
}

TEST_CASE("frt sharp null mechanics") {
  const int T = 80, K = 1;
  auto d = AssignmentDesign::bernoulli_constant(T, 0.5);
  TreatmentPath path = draw_assignment(d, 100);
  std::vector<double> y(T);
  Rng rng(200);
  for (int t = 0; t < T; ++t) y[t] = rng.normal(0.0, 1.0);

  RegressionSpec spec;
  spec.K = K;
  HacConfig hac;

  FrtResult vacuous = frt_sharp(y, path, d, spec, hac, {0, 1}, 0, 7);
  CHECK(vacuous.p == 1.0);
  CHECK(vacuous.draws == 0);

  FrtResult a = frt_sharp(y, path, d, spec, hac, {0, 1}, 99, 7);
  FrtResult b = frt_sharp(y, path, d, spec, hac, {0, 1}, 99, 7);
  CHECK(a.observed == b.observed);
  CHECK(a.p == b.p);
  CHECK(a.resampled == b.resampled);
  CHECK(a.excluded == 0);

  // Granularity: p (valid + 1) is an integer between 1 and valid + 1.
  double scaled = a.p * (static_cast<double>(a.resampled.size()) + 1.0);
  CHECK(std::fabs(scaled - std::round(scaled)) < 1e-9);
  CHECK(a.p >= 1.0 / (a.resampled.size() + 1.0));
  CHECK(a.p <= 1.0);

  CHECK_THROWS_AS(frt_sharp(y, path, d, spec, hac, {0, 1}, -1, 7), SpecError);
}

TEST_CASE("frt rejects at the nominal rate under the sharp null") {
  const int T = 60, K = 1, inner = 199, outer = 1000;
  auto d = AssignmentDesign::bernoulli_constant(T, 0.5);
  RegressionSpec spec;
  spec.K = K;
  HacConfig hac;

  int rejections = 0;
  for (int rep = 0; rep < outer; ++rep) {
    std::vector<double> y = standard_normal_series(T, 5000 + rep, 1.0);
    TreatmentPath path = draw_assignment(d, 9000 + rep);
    FrtResult frt = frt_sharp(y, path, d, spec, hac, {0, 1}, inner, Rng::derive(77, rep));
    if (frt.p <= 0.05) ++rejections;
  }
  double rate = static_cast<double>(rejections) / outer;
  CHECK(rate > 0.03);
  CHECK(rate < 0.07);
}

TEST_CASE("analyze_inference defaults the joint subset to every lag") {
  EstimateResult res = fake_result({0.5, 0.2, 0.1}, {0.1, 0.1, 0.1}, 100);
  InferenceReport report = analyze_inference(res, 0.95, {});
  CHECK(report.lags.size() == 3);
  CHECK(report.joint.df == 3);
  CHECK(report.joint_subset == std::vector<int>({0, 1, 2}));
  CHECK(report.level == 0.95);
  CHECK_FALSE(report.frt.has_value());

  InferenceReport sub = analyze_inference(res, 0.95, {0, 2});
  CHECK(sub.joint.df == 2);
}
