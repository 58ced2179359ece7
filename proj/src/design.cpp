#include "switchback/design.hpp"

#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace switchback {

double Sampler::mean() const {
  switch (kind) {
    case SamplerKind::uniform:
      return 0.5 * (a + b);
    case SamplerKind::normal:
      return a;
    case SamplerKind::two_point:
      return a + prob * (b - a);
  }
  throw SpecError("Sampler::mean: unknown kind");
}

double Sampler::variance() const {
  switch (kind) {
    case SamplerKind::uniform:
      return (b - a) * (b - a) / 12.0;
    case SamplerKind::normal:
      return b;
    case SamplerKind::two_point:
      return prob * (1.0 - prob) * (b - a) * (b - a);
  }
  throw SpecError("Sampler::variance: unknown kind");
}

double Sampler::draw(Rng& rng) const {
  switch (kind) {
    case SamplerKind::uniform:
      return a + (b - a) * rng.next_double();
    case SamplerKind::normal:
      return rng.normal(a, std::sqrt(b));
    case SamplerKind::two_point:
      return rng.bernoulli(prob) ? b : a;
  }
  throw SpecError("Sampler::draw: unknown kind");
}

AssignmentDesign AssignmentDesign::bernoulli(std::vector<double> p, double eps) {
  if (p.empty()) throw SpecError("bernoulli: empty probability vector");
  if (!(eps > 0.0 && eps <= 0.5)) throw SpecError("bernoulli: eps must lie in (0, 0.5]");
  AssignmentDesign design;
  design.kind_ = DesignKind::binary;
  design.means_ = std::move(p);
  design.vars_.reserve(design.means_.size());
  for (std::size_t t = 0; t < design.means_.size(); ++t) {
    double pt = design.means_[t];
    if (!(pt >= eps && pt <= 1.0 - eps))
      throw SpecError("bernoulli: p[" + std::to_string(t) + "] = " + std::to_string(pt) +
                      " outside [eps, 1-eps]");
    design.vars_.push_back(pt * (1.0 - pt));
  }
  return design;
}

AssignmentDesign AssignmentDesign::bernoulli_constant(int T, double p, double eps) {
  if (T < 1) throw SpecError("bernoulli_constant: T must be positive");
  return bernoulli(std::vector<double>(static_cast<std::size_t>(T), p), eps);
}

AssignmentDesign AssignmentDesign::continuous(std::vector<Sampler> samplers, double eps_var) {
  if (samplers.empty()) throw SpecError("continuous: empty sampler vector");
  AssignmentDesign design;
  design.kind_ = DesignKind::continuous;
  design.means_.reserve(samplers.size());
  design.vars_.reserve(samplers.size());
  for (std::size_t t = 0; t < samplers.size(); ++t) {
    double v = samplers[t].variance();
    if (!(v >= eps_var))
      throw SpecError("continuous: variance at t=" + std::to_string(t) + " below floor");
    design.means_.push_back(samplers[t].mean());
    design.vars_.push_back(v);
  }
  design.samplers_ = std::move(samplers);
  return design;
}

AssignmentDesign AssignmentDesign::continuous_moments(std::vector<double> means,
                                                      std::vector<double> vars, double eps_var) {
  if (means.empty() || means.size() != vars.size())
    throw SpecError("continuous_moments: means and vars must be equal-length and nonempty");
  for (std::size_t t = 0; t < vars.size(); ++t)
    if (!(vars[t] >= eps_var))
      throw SpecError("continuous_moments: variance at t=" + std::to_string(t) + " below floor");
  AssignmentDesign design;
  design.kind_ = DesignKind::continuous;
  design.means_ = std::move(means);
  design.vars_ = std::move(vars);
  return design;
}

double AssignmentDesign::prob(int t) const {
  if (kind_ != DesignKind::binary) throw SpecError("prob: design is not binary");
  return means_[t];
}

NormalizedPath normalize(const TreatmentPath& path, const AssignmentDesign& design) {
  if (static_cast<int>(path.z.size()) != design.length())
    throw SpecError("normalize: path length does not match design");
  NormalizedPath out;
  out.z.resize(path.z.size());
  for (int t = 0; t < design.length(); ++t) {
    if (design.kind() == DesignKind::binary && path.z[t] != 0.0 && path.z[t] != 1.0)
      throw SpecError("normalize: binary treatment at t=" + std::to_string(t) +
                      " must be 0 or 1");
    out.z[t] = (path.z[t] - design.mean(t)) / design.variance(t);
  }
  return out;
}

std::vector<double> lag_weights(const AssignmentDesign& design, int K) {
  int T = design.length();
  if (K < 0 || K >= T) throw SpecError("lag_weights: need 0 <= K < T");
  int n = T - K;
  std::vector<double> w(K + 1);
  for (int k = 0; k <= K; ++k) {
    double s = 0.0;
    for (int t = K; t < T; ++t) s += 1.0 / design.variance(t - k);
    w[k] = static_cast<double>(n) / s;
  }
  return w;
}

std::vector<double> interaction_weights(const AssignmentDesign& design, int K) {
  if (design.kind() != DesignKind::binary)
    throw SpecError("interaction_weights: binary designs only");
  int T = design.length();
  if (K < 1 || K >= T) throw SpecError("interaction_weights: need 1 <= K < T");
  int n = T - K;
  std::vector<double> w(K);
  for (int k = 1; k <= K; ++k) {
    double s = 0.0;
    for (int t = K; t < T; ++t) s += 1.0 / (design.variance(t - k) * design.variance(t - k + 1));
    w[k - 1] = static_cast<double>(n) / s;
  }
  return w;
}

namespace {

void validate_exposure(const AssignmentDesign& design, const ExposureSpec& spec) {
  if (design.kind() != DesignKind::binary)
    throw SpecError("exposure_transform: binary designs only");
  if (spec.boundaries.empty()) throw SpecError("exposure: no block boundaries");
  int prev = -1;
  for (int b : spec.boundaries) {
    if (b <= prev) throw SpecError("exposure: boundaries must be strictly increasing from 0");
    prev = b;
  }
  if (spec.boundaries.front() < 0) throw SpecError("exposure: negative boundary");
  if (static_cast<int>(spec.tables.size()) != spec.S() + 1)
    throw SpecError("exposure: need one truth table per block");
  for (int s = 0; s <= spec.S(); ++s) {
    int width = spec.block_width(s);
    if (width > 20) throw SpecError("exposure: block width capped at 20");
    if (static_cast<int>(spec.tables[s].size()) != (1 << width))
      throw SpecError("exposure: table " + std::to_string(s) + " needs 2^width entries");
    for (int v : spec.tables[s])
      if (v != 0 && v != 1) throw SpecError("exposure: truth tables are 0/1 valued");
  }
}

// E[g] over the 2^width block assignments under independent Bernoulli(probs).
double table_mean(const std::vector<int>& table, const std::vector<double>& probs) {
  int width = static_cast<int>(probs.size());
  double e = 0.0;
  for (int a = 0; a < (1 << width); ++a) {
    if (!table[a]) continue;
    double pr = 1.0;
    for (int j = 0; j < width; ++j) pr *= (a >> j & 1) ? probs[j] : 1.0 - probs[j];
    e += pr;
  }
  return e;
}

}  // namespace

ExposureColumns exposure_transform(const TreatmentPath& path, const AssignmentDesign& design,
                                   const ExposureSpec& spec) {
  validate_exposure(design, spec);
  int T = design.length();
  int K = spec.K();
  if (K >= T) throw SpecError("exposure: K must be below T");
  if (static_cast<int>(path.z.size()) != T)
    throw SpecError("exposure: path length does not match design");
  int n = T - K, S1 = spec.S() + 1;

  ExposureColumns out;
  out.gtilde.resize(n, S1);
  out.mean.resize(n, S1);
  out.var.resize(n, S1);
  out.weights.assign(S1, 0.0);

  for (int s = 0; s < S1; ++s) {
    int low = spec.block_low(s), width = spec.block_width(s);
    // Rows share a mean whenever their blocks see the same probabilities.
    std::map<std::vector<double>, double> memo;
    double inv_sum = 0.0;
    for (int r = 0; r < n; ++r) {
      int t = K + r;
      std::vector<double> probs(width);
      int idx = 0;
      for (int j = 0; j < width; ++j) {
        probs[j] = design.prob(t - (low + j));
        if (path.z[t - (low + j)] != 0.0) idx |= 1 << j;
      }
      auto it = memo.find(probs);
      double e = it != memo.end() ? it->second : (memo[probs] = table_mean(spec.tables[s], probs));
      double v = e * (1.0 - e);
      if (v < 1e-12)
        throw SpecError("exposure: mapping " + std::to_string(s) +
                        " is (near-)constant at time " + std::to_string(t) +
                        ", variance below floor");
      out.mean(r, s) = e;
      out.var(r, s) = v;
      out.gtilde(r, s) = (spec.tables[s][idx] - e) / v;
      inv_sum += 1.0 / v;
    }
    out.weights[s] = static_cast<double>(n) / inv_sum;
  }
  return out;
}

std::vector<double> generalized_weights(const AssignmentDesign& design,
                                        const std::vector<double>& h, int K) {
  int T = design.length();
  if (K < 0 || K >= T) throw SpecError("generalized_weights: need 0 <= K < T");
  int n = T - K;
  if (static_cast<int>(h.size()) != n)
    throw SpecError("generalized_weights: h needs one entry per estimation row");
  std::vector<double> w(K + 1);
  for (int k = 0; k <= K; ++k) {
    double s = 0.0;
    for (int r = 0; r < n; ++r) s += h[r] * h[r] / design.variance(K + r - k);
    if (s <= 0.0) throw SpecError("generalized_weights: h is zero on every row");
    w[k] = static_cast<double>(n) / s;
  }
  return w;
}

TreatmentPath draw_assignment(const AssignmentDesign& design, std::uint64_t seed) {
  if (!design.can_draw())
    throw SpecError("draw_assignment: moments-only design cannot be drawn from");
  Rng rng(seed);
  TreatmentPath path;
  path.z.resize(design.length());
  if (design.kind_ == DesignKind::binary) {
    for (int t = 0; t < design.length(); ++t)
      path.z[t] = rng.bernoulli(design.means_[t]) ? 1.0 : 0.0;
  } else {
    for (int t = 0; t < design.length(); ++t) path.z[t] = design.samplers_[t].draw(rng);
  }
  return path;
}

}  // namespace switchback
