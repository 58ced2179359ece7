#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "switchback/hac.hpp"
#include "switchback/inference.hpp"
#include "switchback/simulation.hpp"

namespace switchback {

// Runs `body(i)` for i = 0..n-1 on up to `threads` workers. Each index owns
// its output slots, so results are identical at any thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

// threads <= 0 falls back to SWITCHBACK_THREADS, then to 1.
int resolve_threads(int requested);

// Design-based replication recipe: potential outcomes are built once per T
// (the factory must freeze its error series internally), then only the
// assignment path is redrawn.
struct ExperimentConfig {
  std::function<PotentialOutcomeModel(int)> make_model;
  std::function<AssignmentDesign(int)> make_design;
  RegressionSpec reg;
  HacConfig hac;
  std::vector<int> T_values;
  int replications = 5000;
  std::uint64_t root_seed = 1;
  bool store_full_vhat = false;
  int threads = 0;
  std::string name = "experiment";
};

struct ReplicationSet {
  int T = 0, K = 0, R = 0;
  Eigen::MatrixXd tau_hat;            // R x P
  Eigen::MatrixXd se;                 // R x P
  std::vector<std::uint64_t> seeds;   // per-replication path seeds
  std::vector<Eigen::MatrixXd> vhat;  // per replication, if requested
  Eigen::VectorXd mean_tau, sd_tau;
  Eigen::MatrixXd mean_vhat;  // filled when store_full_vhat
};

// Redraws assignments with seeds derive(root_seed, r) and aggregates in index
// order with pairwise summation: bit-identical output at any thread count.
ReplicationSet replicate(const ExperimentConfig& config, int T);

// Monte Carlo covariance of the score vectors sum_t z~_{t-k} U_t / sqrt(T-K),
// with oracle residuals U_t = Y_t - sum_l z~_{t-l} w_l tau_l built from the
// closed-form estimands. Uses a seed stream disjoint from replicate's.
Eigen::MatrixXd oracle_V(const ExperimentConfig& config, int T, int R_mc);

struct CoverageTable {
  std::vector<int> T_values;
  Eigen::MatrixXd coverage;  // one row per T, one column per lag
  double level = 0.95;
};

CoverageTable coverage_table(const ExperimentConfig& config, double level);

struct ErrorCurves {
  std::vector<int> T_values;
  std::vector<std::vector<double>> l2;  // per T: per-replication ||tau_hat - tau||_2
  std::vector<double> l2_median;        // per T
  std::vector<std::vector<int>> bandwidths;    // per T: the L grid {0, 1, 5, rule}
  std::vector<std::vector<double>> frobenius;  // per T, per L: mean ||Vhat-V||_F / ||V||_F
};

// The Frobenius leg standardizes against oracle_V(R_mc); when ||V||_F is zero
// the absolute error is reported instead.
ErrorCurves error_curves(const ExperimentConfig& config, int R_mc);

// The displayed closed-form variances for the homogeneous linear model with
// constant p (optionally with consecutive-lag interaction coefficients;
// beta_int[l] multiplies z_{t-l} z_{t-l+1}, index 0 unused).
struct AnalyticVariances {
  double full = 0.0;             // full regression; no k dependence
  std::vector<double> marginal;  // per k = 0..K
  double with_interaction = 0.0;
  double without_interaction = 0.0;
};

AnalyticVariances analytic_variances(const std::vector<double>& beta,
                                     const std::vector<double>& beta_int,
                                     const std::vector<double>& eps, int T, int K, double p);

// Tidy emission, all numbers at 17 significant digits.
void write_replications_csv(const std::string& path, const ReplicationSet& rs);
void write_coverage_csv(const std::string& path, const CoverageTable& table);
void write_consistency_csv(const std::string& path, const ErrorCurves& curves);
void write_frobenius_csv(const std::string& path, const ErrorCurves& curves);

}  // namespace switchback
