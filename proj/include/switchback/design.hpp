#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "switchback/errors.hpp"
#include "switchback/rng.hpp"

namespace switchback {

// Time indices are 0-based throughout: t = 0..T-1, estimation rows t = K..T-1.

struct TreatmentPath {
  std::vector<double> z;
};

// z[t] = (path[t] - mean_t) / var_t
struct NormalizedPath {
  std::vector<double> z;
};

enum class DesignKind { binary, continuous };

enum class SamplerKind { uniform, normal, two_point };

// Per-time sampler for continuous designs. Mean and variance are design
// knowledge declared up front, never estimated from draws.
struct Sampler {
  SamplerKind kind = SamplerKind::normal;
  double a = 0.0;     // uniform: lower; normal: mean; two_point: low value
  double b = 1.0;     // uniform: upper; normal: variance; two_point: high value
  double prob = 0.5;  // two_point: P[high]
  double mean() const;
  double variance() const;
  double draw(Rng& rng) const;
};

class AssignmentDesign {
 public:
  // Bernoulli(p_t). Every p_t must lie in [eps, 1-eps], eps in (0, 0.5].
  static AssignmentDesign bernoulli(std::vector<double> p, double eps = 0.01);
  static AssignmentDesign bernoulli_constant(int T, double p, double eps = 0.01);
  // Continuous design from per-time samplers; every variance must be >= eps_var.
  static AssignmentDesign continuous(std::vector<Sampler> samplers, double eps_var = 1e-6);
  // Continuous design known only through its moments (e.g. read from a data
  // file). Supports estimation but not drawing.
  static AssignmentDesign continuous_moments(std::vector<double> means, std::vector<double> vars,
                                             double eps_var = 1e-6);

  DesignKind kind() const { return kind_; }
  int length() const { return static_cast<int>(means_.size()); }
  double mean(int t) const { return means_[t]; }
  double variance(int t) const { return vars_[t]; }
  double prob(int t) const;  // binary only
  bool can_draw() const { return kind_ == DesignKind::binary || !samplers_.empty(); }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& variances() const { return vars_; }

  friend TreatmentPath draw_assignment(const AssignmentDesign& design, std::uint64_t seed);

 private:
  AssignmentDesign() = default;
  DesignKind kind_ = DesignKind::binary;
  std::vector<double> means_, vars_;
  std::vector<Sampler> samplers_;  // continuous only; may be empty (moments-only)
};

NormalizedPath normalize(const TreatmentPath& path, const AssignmentDesign& design);

// w_k = [ (T-K)^{-1} sum_{t=K}^{T-1} 1/v_{t-k} ]^{-1}, k = 0..K.
std::vector<double> lag_weights(const AssignmentDesign& design, int K);

// w_{k-1,k} = [ (T-K)^{-1} sum_{t=K}^{T-1} 1/(v_{t-k} v_{t-k+1}) ]^{-1},
// k = 1..K, returned at index k-1. Binary designs only.
std::vector<double> interaction_weights(const AssignmentDesign& design, int K);

// Exposure blocks partition lags 0..K at the boundaries: block 0 covers lags
// 0..k_0, block s covers k_{s-1}+1..k_s, and k_S = K. Each truth table has
// 2^width entries in {0,1}; bit j of a table index is the treatment at lag
// (block low + j), so bit 0 is the newest time in the block.
struct ExposureSpec {
  std::vector<int> boundaries;           // k_0 < k_1 < ... < k_S = K
  std::vector<std::vector<int>> tables;  // S+1 truth tables
  int S() const { return static_cast<int>(boundaries.size()) - 1; }
  int K() const { return boundaries.back(); }
  int block_low(int s) const { return s == 0 ? 0 : boundaries[s - 1] + 1; }
  int block_width(int s) const { return boundaries[s] - block_low(s) + 1; }
};

struct ExposureColumns {
  Eigen::MatrixXd gtilde;       // (T-K) x (S+1), row r is time K+r
  Eigen::MatrixXd mean;         // E[g_{t,s}], exact from block enumeration
  Eigen::MatrixXd var;          // Var[g_{t,s}] = E(1-E) for binary mappings
  std::vector<double> weights;  // w_{g,s}: harmonic mean of Var over rows
};

// Moments computed exactly by enumerating the 2^width block assignments
// weighted by the Bernoulli products. Block width capped at 20.
ExposureColumns exposure_transform(const TreatmentPath& path, const AssignmentDesign& design,
                                   const ExposureSpec& spec);

// w_{h,k} = [ (T-K)^{-1} sum_t h_t^2 / v_{t-k} ]^{-1}. h has one entry per
// estimation row (outcome times K..T-1) and scales that whole design row.
std::vector<double> generalized_weights(const AssignmentDesign& design, const std::vector<double>& h,
                                        int K);

TreatmentPath draw_assignment(const AssignmentDesign& design, std::uint64_t seed);

}  // namespace switchback
