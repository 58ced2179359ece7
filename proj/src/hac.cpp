#include "switchback/hac.hpp"

#include <cmath>
#include <string>

#include "switchback/errors.hpp"

namespace switchback {

const char* kernel_name(Kernel k) { return k == Kernel::bartlett ? "bartlett" : "truncated"; }

int bandwidth_rule(int T) {
  if (T < 1) throw SpecError("bandwidth_rule: T must be positive");
  return static_cast<int>(std::pow(static_cast<double>(T), 0.25) + 1e-9);
}

double bartlett_weight(int lag, int L) {
  int a = lag < 0 ? -lag : lag;
  if (a > L) return 0.0;
  return 1.0 - static_cast<double>(a) / (L + 1);
}

double kernel_weight(Kernel kernel, int lag, int L) {
  if (kernel == Kernel::bartlett) return bartlett_weight(lag, L);
  return (lag < 0 ? -lag : lag) <= L ? 1.0 : 0.0;
}

std::vector<Eigen::MatrixXd> score_autocovariances(const Eigen::MatrixXd& X,
                                                   const Eigen::VectorXd& residuals, int Lmax) {
  int n = static_cast<int>(X.rows());
  if (residuals.size() != n) throw SpecError("score_autocovariances: residual length mismatch");
  if (Lmax < 0 || Lmax >= n) throw SpecError("score_autocovariances: need 0 <= Lmax < rows");
  Eigen::MatrixXd S = X.array().colwise() * residuals.array();  // s_t = u_t x_t
  std::vector<Eigen::MatrixXd> gammas;
  gammas.reserve(Lmax + 1);
  for (int l = 0; l <= Lmax; ++l)
    gammas.push_back(S.topRows(n - l).transpose() * S.bottomRows(n - l));
  return gammas;
}

Eigen::MatrixXd assemble_hac(const std::vector<Eigen::MatrixXd>& gammas, const Eigen::MatrixXd& X,
                             const std::vector<double>& weights, int L, Kernel kernel) {
  if (L < 0 || L >= static_cast<int>(gammas.size()))
    throw SpecError("assemble_hac: bandwidth outside the precomputed lag range");
  int n = static_cast<int>(X.rows()), P = static_cast<int>(X.cols());
  if (static_cast<int>(weights.size()) != P) throw SpecError("assemble_hac: weight count mismatch");

  Eigen::MatrixXd M = gammas[0];
  for (int l = 1; l <= L; ++l) {
    double kappa = kernel_weight(kernel, l, L);
    if (kappa != 0.0) M += kappa * (gammas[l] + gammas[l].transpose());
  }

  Eigen::MatrixXd gram = X.transpose() * X;
  Eigen::MatrixXd gram_inv = gram.ldlt().solve(Eigen::MatrixXd::Identity(P, P));
  Eigen::VectorXd winv(P);
  for (int j = 0; j < P; ++j) {
    if (!(weights[j] > 0.0)) throw SpecError("assemble_hac: weights must be positive");
    winv[j] = 1.0 / weights[j];
  }
  Eigen::MatrixXd V = static_cast<double>(n) * winv.asDiagonal() * gram_inv * M * gram_inv *
                      winv.asDiagonal();
  V = ((V + V.transpose()) / 2.0).eval();

  if (kernel == Kernel::bartlett) {
    // The Bartlett lag sum is PSD in exact arithmetic; only roundoff-scale
    // negative eigenvalues are tolerated.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(V);
    double floor = -1e-8 * std::abs(V.trace());
    if (eig.eigenvalues().minCoeff() < floor)
      throw NumericError("hac: covariance estimate is not positive semidefinite");
  }
  return V;
}

HacCovariance hac_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                             const std::vector<double>& weights, const HacConfig& config) {
  if (config.bandwidth < 0)
    throw SpecError("hac_covariance: bandwidth must be resolved by the caller");
  if (config.bandwidth >= X.rows())
    throw SpecError("hac_covariance: bandwidth must be below the row count");
  HacCovariance out;
  out.bandwidth = config.bandwidth;
  out.kernel = config.kernel;
  out.vhat = assemble_hac(score_autocovariances(X, residuals, config.bandwidth), X, weights,
                          config.bandwidth, config.kernel);
  return out;
}

void attach_hac(EstimateResult& result, const HacConfig& config) {
  HacConfig resolved = config;
  if (resolved.bandwidth < 0) resolved.bandwidth = bandwidth_rule(result.T);
  if (resolved.bandwidth >= result.rows())
    throw SpecError("attach_hac: bandwidth " + std::to_string(resolved.bandwidth) +
                    " must be below " + std::to_string(result.rows()) + " rows");
  HacCovariance cov = hac_covariance(result.X, result.residuals, result.weights, resolved);
  result.vhat = std::move(cov.vhat);
  result.hac_bandwidth = cov.bandwidth;
  result.hac_kernel = kernel_name(cov.kernel);
}

Eigen::MatrixXd bias_term(const PotentialOutcomeModel& model, const AssignmentDesign& design,
                          int K, const HacConfig& config) {
  int T = model_length(model);
  if (design.length() != T) throw SpecError("bias_term: design length does not match model");
  int n = T - K;
  int L = config.bandwidth;
  if (L < 0) L = bandwidth_rule(T);
  if (L >= n) throw SpecError("bias_term: bandwidth must be below the row count");

  TrueEffects effects = true_tau(model, design, K);
  std::vector<double> w = lag_weights(design, K);
  Eigen::MatrixXd b(n, K + 1);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k <= K; ++k)
      b(r, k) = effects.per_time(r, k) - w[k] * effects.tau[k] / design.variance(K + r - k);

  // b' Q b / n through the same lag-sum machinery: gammas of b with unit
  // residuals, reusing the kernel window the covariance estimator applies.
  std::vector<Eigen::MatrixXd> gammas =
      score_autocovariances(b, Eigen::VectorXd::Ones(n), L);
  Eigen::MatrixXd B = gammas[0];
  for (int l = 1; l <= L; ++l) {
    double kappa = kernel_weight(config.kernel, l, L);
    if (kappa != 0.0) B += kappa * (gammas[l] + gammas[l].transpose());
  }
  return B / static_cast<double>(n);
}

}  // namespace switchback
