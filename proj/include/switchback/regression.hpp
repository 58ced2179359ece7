#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "switchback/design.hpp"

namespace switchback {

enum class Variant { full, marginal, interaction, exposure };

struct RegressionSpec {
  int K = 0;
  Variant variant = Variant::full;
  int marginal_lag = 0;                  // marginal only
  std::optional<ExposureSpec> exposure;  // exposure only; boundaries end at K
  std::optional<std::vector<double>> h;  // full only: per-row scale, length T-K
};

int variant_columns(const RegressionSpec& spec);

struct LaggedDesign {
  Eigen::MatrixXd X;  // (T-K) x P, row r is outcome time K+r
  int K = 0;
  Variant variant = Variant::full;
};

// Full row t: (z~_t, z~_{t-1}, ..., z~_{t-K}). Interaction appends
// (z~_t z~_{t-1}, ..., z~_{t-K+1} z~_{t-K}). Marginal keeps z~_{t-m} only.
// Exposure designs are assembled from exposure_transform columns instead.
LaggedDesign build_design(const NormalizedPath& zt, int K, Variant variant, int marginal_lag = 0);

struct OlsSolution {
  Eigen::VectorXd coef;
  double gram_condition = 0.0;  // cond(X'X), i.e. cond(X)^2
};

// Least squares through a column-pivoted QR, never the normal equations.
// Rank deficiency (relative pivot threshold 1e-10) raises NumericError naming
// the first column outside the independent set.
OlsSolution ols_no_intercept(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// tau_hat[j] = tau_tilde[j] / w[j]; weights must be positive.
Eigen::VectorXd rescale(const Eigen::VectorXd& tau_tilde, const std::vector<double>& weights);

struct EstimateResult {
  Eigen::VectorXd tau_tilde;
  Eigen::VectorXd tau_hat;
  std::vector<double> weights;  // diagonal of W per column
  Eigen::VectorXd residuals;    // raw scale: y_K - X tau_tilde
  Eigen::MatrixXd X;            // kept for the HAC step
  Eigen::MatrixXd vhat;         // empty until attach_hac fills it
  int hac_bandwidth = -1;
  std::string hac_kernel;
  int T = 0, K = 0;
  Variant variant = Variant::full;
  double gram_condition = 0.0;
  bool condition_warning = false;  // gram_condition > 1e8
  int rows() const { return T - K; }
};

// normalize -> build_design -> ols -> rescale -> residuals. Only rows
// t = K..T-1 enter the fit; the first K outcomes are ingested but unused.
EstimateResult estimate(const std::vector<double>& y, const TreatmentPath& path,
                        const AssignmentDesign& design, const RegressionSpec& spec);

// Weighted least squares for the lag-0 effect:
// [ sum_t (z_t - p_t)^2 / v_t ]^{-1} sum_t z~_t y_t, summed over all T rows.
// Coincides with the K=0 regression estimate when p is constant.
double wls_lag0(const std::vector<double>& y, const TreatmentPath& path,
                const AssignmentDesign& design);

}  // namespace switchback
