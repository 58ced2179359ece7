#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "switchback/design.hpp"

namespace switchback {

// Fixed potential outcomes: all randomness lives in the assignment draw.

// Y_t = sum_{k=0}^{band} beta(t,k) z_{t-k}
//       [+ sum_{k=1}^{band} beta_int(t,k) z_{t-k} z_{t-k+1}] + eps_t
// Banded storage: beta is T x (band+1); terms with t-k < 0 do not exist.
// beta_int, when present, has the same shape with column 0 unused.
struct LinearPOModel {
  Eigen::MatrixXd beta;
  Eigen::MatrixXd beta_int;  // empty when the model has no interactions
  std::vector<double> eps;   // fixed, treatment independent
  int T() const { return static_cast<int>(eps.size()); }
  int band() const { return static_cast<int>(beta.cols()) - 1; }
  bool has_interactions() const { return beta_int.size() != 0; }
  static LinearPOModel homogeneous(int T, const std::vector<double>& betas,
                                   std::vector<double> eps);
};

// Y_t = mu(z_t) + sum_k phi_k Y_{t-k} + eps_t with zero pre-sample values and
// mu affine in z: mu(z) = mu0 + (mu1 - mu0) z, so continuous doses work too.
struct ARPOModel {
  std::vector<double> phi;
  double mu1 = 0.0, mu0 = 0.0;
  std::vector<double> eps;
  int T() const { return static_cast<int>(eps.size()); }
};

// Y_t = mu_t(z_t) + eps_t(z_t) + sum_{k=1}^q theta_k eps_{t-k}(z_{t-k}).
// Binary treatments only; pre-sample error terms are zero.
struct MAPOModel {
  std::vector<double> theta;
  std::vector<std::array<double, 2>> mu;    // mu[t] = {mu_t(0), mu_t(1)}
  std::vector<std::array<double, 2>> epsz;  // epsz[t] = {eps_t(0), eps_t(1)}
  int T() const { return static_cast<int>(mu.size()); }
};

using PotentialOutcomeModel = std::variant<LinearPOModel, ARPOModel, MAPOModel>;

int model_length(const PotentialOutcomeModel& model);

// psi_0 = 1, psi_j = sum_{k=1}^{min(p,j)} phi_k psi_{j-k}.
std::vector<double> impulse_responses(const std::vector<double>& phi, int H);

std::vector<double> simulate(const PotentialOutcomeModel& model, const TreatmentPath& path);

struct TrueEffects {
  Eigen::VectorXd tau;           // K+1 lagged estimands
  Eigen::MatrixXd per_time;      // (T-K) x (K+1): tau_{t,k}, row r is time K+r
  Eigen::VectorXd tau_int;       // K interaction estimands, or empty
  Eigen::MatrixXd per_time_int;  // (T-K) x K, or empty
};

// Closed-form estimands. Linear: tau_{t,k} = beta(t,k) (+ design-averaged
// interaction terms). AR: tau_{t,k} = psi_k (mu1 - mu0). MA: tau_0 averages
// the mean and error shifts, tau_k = theta_k * shift for k <= q, 0 beyond.
TrueEffects true_tau(const PotentialOutcomeModel& model, const AssignmentDesign& design, int K);

// tau_{t,k} by exhausting the 2^t assignments of the other coordinates,
// weighted by their Bernoulli probabilities. Binary designs, t <= 20.
double brute_force_tau(const PotentialOutcomeModel& model, const AssignmentDesign& design, int t,
                       int k);

// Frozen error series: seeded standard normal draws scaled by sd.
std::vector<double> standard_normal_series(int T, std::uint64_t seed, double sd = 1.0);

}  // namespace switchback
