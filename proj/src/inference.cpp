#include "switchback/inference.hpp"

#include <algorithm>
#include <cmath>

#include "switchback/errors.hpp"
#include "switchback/stats.hpp"

namespace switchback {

std::vector<LagInference> confidence_intervals(const EstimateResult& result, double level) {
  if (!(level > 0.0 && level < 1.0)) throw SpecError("confidence_intervals: level in (0,1)");
  if (result.vhat.size() == 0)
    throw SpecError("confidence_intervals: attach a covariance estimate first");
  double q = normal_quantile(0.5 + level / 2.0);
  int n = result.rows();
  std::vector<LagInference> out(result.tau_hat.size());
  for (int j = 0; j < static_cast<int>(out.size()); ++j) {
    LagInference& li = out[j];
    li.coefficient = j;
    li.estimate = result.tau_hat[j];
    li.se = std::sqrt(std::max(result.vhat(j, j), 0.0) / n);
    li.ci_low = li.estimate - q * li.se;
    li.ci_high = li.estimate + q * li.se;
    if (li.se > 0.0) {
      li.p = 2.0 * (1.0 - normal_cdf(std::abs(li.estimate) / li.se));
    } else {
      li.degenerate = true;
      li.p = li.estimate == 0.0 ? 1.0 : 0.0;
    }
  }
  return out;
}

WaldResult wald_test(const EstimateResult& result, const std::vector<int>& subset) {
  if (result.vhat.size() == 0) throw SpecError("wald_test: attach a covariance estimate first");
  if (subset.empty()) throw SpecError("wald_test: empty coefficient subset");
  int P = static_cast<int>(result.tau_hat.size());
  int m = static_cast<int>(subset.size());
  Eigen::VectorXd tau_s(m);
  Eigen::MatrixXd V_s(m, m);
  for (int i = 0; i < m; ++i) {
    if (subset[i] < 0 || subset[i] >= P) throw SpecError("wald_test: subset index out of range");
    for (int j = 0; j < i; ++j)
      if (subset[j] == subset[i]) throw SpecError("wald_test: repeated subset index");
    tau_s[i] = result.tau_hat[subset[i]];
    for (int j = 0; j < m; ++j) V_s(i, j) = result.vhat(subset[i], subset[j]);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V_s);
  qr.setThreshold(1e-12);
  if (qr.rank() < m)
    throw NumericError(
        "wald_test: covariance block is singular; drop lags from the subset");
  WaldResult out;
  out.df = m;
  out.statistic = result.rows() * tau_s.dot(qr.solve(tau_s));
  if (out.statistic < 0.0) out.statistic = 0.0;
  out.p = chi_squared_upper_tail(out.statistic, m);
  return out;
}

double frt_pvalue(double observed, const std::vector<double>& resampled) {
  int count = 0;
  for (double s : resampled)
    if (s >= observed) ++count;
  return (1.0 + count) / (static_cast<double>(resampled.size()) + 1.0);
}

FrtResult frt_sharp(const std::vector<double>& y, const TreatmentPath& path,
                    const AssignmentDesign& design, const RegressionSpec& spec,
                    const HacConfig& hac, const std::vector<int>& subset, int n_perm,
                    std::uint64_t seed) {
  if (n_perm < 0) throw SpecError("frt_sharp: negative resample count");
  if (!design.can_draw()) throw SpecError("frt_sharp: the design must support drawing");

  auto statistic = [&](const TreatmentPath& p) {
    EstimateResult res = estimate(y, p, design, spec);
    attach_hac(res, hac);
    return wald_test(res, subset).statistic;
  };

  FrtResult out;
  out.draws = n_perm;
  out.observed = statistic(path);
  out.resampled.reserve(n_perm);
  for (int r = 0; r < n_perm; ++r) {
    TreatmentPath redraw = draw_assignment(design, Rng::derive(seed, r));
    try {
      out.resampled.push_back(statistic(redraw));
    } catch (const NumericError&) {
      ++out.excluded;  // singular refit under this redraw; dropped
    }
  }
  if (out.excluded * 100 > n_perm)
    throw NumericError("frt_sharp: over 1% of resamples were singular; the design is too small");
  out.p = frt_pvalue(out.observed, out.resampled);
  return out;
}

InferenceReport analyze_inference(const EstimateResult& result, double level,
                                  const std::vector<int>& joint_subset) {
  InferenceReport report;
  report.level = level;
  report.lags = confidence_intervals(result, level);
  std::vector<int> subset = joint_subset;
  if (subset.empty())
    for (int j = 0; j < static_cast<int>(result.tau_hat.size()); ++j) subset.push_back(j);
  report.joint_subset = subset;
  report.joint = wald_test(result, subset);
  return report;
}

}  // namespace switchback
