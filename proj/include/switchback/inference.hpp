#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "switchback/hac.hpp"
#include "switchback/regression.hpp"

namespace switchback {

struct LagInference {
  int coefficient = 0;  // column index; equals the lag for the full variant
  double estimate = 0.0;
  double se = 0.0;  // sqrt(max(vhat_jj, 0) / (T-K))
  double ci_low = 0.0, ci_high = 0.0;
  double p = 1.0;
  bool degenerate = false;  // se == 0; p resolved by whether the estimate is 0
};

// Normal-pivot intervals tau_hat_j +- q_{(1+level)/2} se_j and two-sided
// p = 2(1 - Phi(|tau_hat_j| / se_j)).
std::vector<LagInference> confidence_intervals(const EstimateResult& result, double level);

struct WaldResult {
  double statistic = 0.0;
  int df = 0;
  double p = 1.0;
};

// Weak null over a subset S of coefficients: (T-K) tau_S' Vhat_SS^{-1} tau_S
// against chi-squared(|S|). Singular Vhat_SS raises NumericError with a hint
// to shrink the subset.
WaldResult wald_test(const EstimateResult& result, const std::vector<int>& subset);

struct FrtResult {
  double observed = 0.0;
  double p = 1.0;
  int draws = 0;     // requested resamples
  int excluded = 0;  // singular refits dropped; must stay under 1% of draws
  std::vector<double> resampled;
};

// Sharp null: the outcome series is assignment invariant, so Y stays fixed
// while fresh paths are drawn from the design (redrawn, not permuted, which
// would be wrong under time-varying probabilities). The statistic is the
// studentized Wald statistic on the subset; p = (1 + #{resample >= observed})
// / (#valid + 1).
FrtResult frt_sharp(const std::vector<double>& y, const TreatmentPath& path,
                    const AssignmentDesign& design, const RegressionSpec& spec,
                    const HacConfig& hac, const std::vector<int>& subset, int n_perm,
                    std::uint64_t seed);

double frt_pvalue(double observed, const std::vector<double>& resampled);

struct InferenceReport {
  std::vector<LagInference> lags;
  WaldResult joint;
  std::optional<FrtResult> frt;
  double level = 0.95;
  std::vector<int> joint_subset;
};

InferenceReport analyze_inference(const EstimateResult& result, double level,
                                  const std::vector<int>& joint_subset);

}  // namespace switchback
