#pragma once

#include <vector>

#include <Eigen/Dense>

#include "switchback/regression.hpp"
#include "switchback/simulation.hpp"

namespace switchback {

enum class Kernel { bartlett, truncated };

const char* kernel_name(Kernel k);

struct HacConfig {
  int bandwidth = -1;  // negative means: apply the floor(T^(1/4)) rule
  Kernel kernel = Kernel::bartlett;
};

// floor(T^(1/4)), nudged so exact fourth powers do not round down.
int bandwidth_rule(int T);

// 1 - |lag|/(L+1) inside the window, 0 beyond.
double bartlett_weight(int lag, int L);
double kernel_weight(Kernel kernel, int lag, int L);

struct HacCovariance {
  Eigen::MatrixXd vhat;
  int bandwidth = 0;
  Kernel kernel = Kernel::bartlett;
};

// Sandwich (T-K) W^{-1} (X'X)^{-1} M (X'X)^{-1} W^{-1} with the meat as a
// lag sum M = Gamma_0 + sum_{l=1}^L kappa(l) (Gamma_l + Gamma_l'),
// Gamma_l = sum_t u_t u_{t+l} x_t x_{t+l}', which is O(n L P^2) and equals
// the dense-Q formulation. Requires a resolved bandwidth 0 <= L < rows.
// No degrees-of-freedom correction is applied anywhere.
HacCovariance hac_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                             const std::vector<double>& weights, const HacConfig& config);

// Resolves the bandwidth rule against result.T, computes the covariance and
// stores it on the result.
void attach_hac(EstimateResult& result, const HacConfig& config);

// Gamma_0..Gamma_Lmax for scores s_t = u_t x_t, so one fit can serve several
// bandwidths.
std::vector<Eigen::MatrixXd> score_autocovariances(const Eigen::MatrixXd& X,
                                                   const Eigen::VectorXd& residuals, int Lmax);

Eigen::MatrixXd assemble_hac(const std::vector<Eigen::MatrixXd>& gammas, const Eigen::MatrixXd& X,
                             const std::vector<double>& weights, int L, Kernel kernel);

// Heterogeneity bias term. b[t,k] = tau_{t,k} - w_k tau_k / v_{t-k} over the
// estimation rows; returns b' Q b / (T-K) with the same kernel window the
// covariance estimator uses. Zero exactly for homogeneous effects with
// constant probabilities; PSD under the Bartlett kernel.
Eigen::MatrixXd bias_term(const PotentialOutcomeModel& model, const AssignmentDesign& design, int K,
                          const HacConfig& config);

}  // namespace switchback
