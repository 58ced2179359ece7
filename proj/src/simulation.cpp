#include "switchback/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "switchback/errors.hpp"

namespace switchback {

LinearPOModel LinearPOModel::homogeneous(int T, const std::vector<double>& betas,
                                         std::vector<double> eps) {
  if (T < 1) throw SpecError("homogeneous: T must be positive");
  if (betas.empty()) throw SpecError("homogeneous: need at least the lag-0 coefficient");
  if (static_cast<int>(eps.size()) != T) throw SpecError("homogeneous: eps must have length T");
  LinearPOModel m;
  m.beta.resize(T, betas.size());
  for (int t = 0; t < T; ++t)
    for (std::size_t k = 0; k < betas.size(); ++k) m.beta(t, k) = betas[k];
  m.eps = std::move(eps);
  return m;
}

int model_length(const PotentialOutcomeModel& model) {
  return std::visit([](const auto& m) { return m.T(); }, model);
}

std::vector<double> impulse_responses(const std::vector<double>& phi, int H) {
  if (H < 0) throw SpecError("impulse_responses: H must be nonnegative");
  std::vector<double> psi(H + 1, 0.0);
  psi[0] = 1.0;
  int p = static_cast<int>(phi.size());
  for (int j = 1; j <= H; ++j)
    for (int k = 1; k <= std::min(p, j); ++k) psi[j] += phi[k - 1] * psi[j - k];
  return psi;
}

namespace {

std::vector<double> simulate_linear(const LinearPOModel& m, const std::vector<double>& z) {
  int T = m.T(), band = m.band();
  if (m.beta.rows() != T) throw SpecError("simulate: beta rows must equal T");
  if (m.has_interactions() &&
      (m.beta_int.rows() != T || m.beta_int.cols() != m.beta.cols()))
    throw SpecError("simulate: beta_int must match beta's shape");
  std::vector<double> y(T);
  for (int t = 0; t < T; ++t) {
    double v = m.eps[t];
    for (int k = 0; k <= std::min(band, t); ++k) v += m.beta(t, k) * z[t - k];
    if (m.has_interactions())
      for (int k = 1; k <= std::min(band, t); ++k)
        v += m.beta_int(t, k) * z[t - k] * z[t - k + 1];
    y[t] = v;
  }
  return y;
}

std::vector<double> simulate_ar(const ARPOModel& m, const std::vector<double>& z) {
  int T = m.T(), p = static_cast<int>(m.phi.size());
  std::vector<double> y(T);
  for (int t = 0; t < T; ++t) {
    double v = m.mu0 + (m.mu1 - m.mu0) * z[t] + m.eps[t];
    for (int k = 1; k <= std::min(p, t); ++k) v += m.phi[k - 1] * y[t - k];
    y[t] = v;
  }
  return y;
}

std::vector<double> simulate_ma(const MAPOModel& m, const std::vector<double>& z) {
  int T = m.T(), q = static_cast<int>(m.theta.size());
  if (static_cast<int>(m.epsz.size()) != T) throw SpecError("simulate: epsz must have length T");
  std::vector<double> y(T);
  for (int t = 0; t < T; ++t) {
    if (z[t] != 0.0 && z[t] != 1.0) throw SpecError("simulate: MA models take binary treatments");
    int zt = z[t] != 0.0 ? 1 : 0;
    double v = m.mu[t][zt] + m.epsz[t][zt];
    for (int k = 1; k <= std::min(q, t); ++k) {
      int zl = z[t - k] != 0.0 ? 1 : 0;
      v += m.theta[k - 1] * m.epsz[t - k][zl];
    }
    y[t] = v;
  }
  return y;
}

}  // namespace

std::vector<double> simulate(const PotentialOutcomeModel& model, const TreatmentPath& path) {
  if (static_cast<int>(path.z.size()) != model_length(model))
    throw SpecError("simulate: path length does not match model");
  if (auto* m = std::get_if<LinearPOModel>(&model)) return simulate_linear(*m, path.z);
  if (auto* m = std::get_if<ARPOModel>(&model)) return simulate_ar(*m, path.z);
  return simulate_ma(std::get<MAPOModel>(model), path.z);
}

namespace {

TrueEffects true_tau_linear(const LinearPOModel& m, const AssignmentDesign& design, int K) {
  int T = m.T(), band = m.band(), n = T - K;
  TrueEffects out;
  out.per_time = Eigen::MatrixXd::Zero(n, K + 1);
  for (int r = 0; r < n; ++r) {
    int t = K + r;
    for (int k = 0; k <= K; ++k) {
      double v = k <= band ? m.beta(t, k) : 0.0;
      if (m.has_interactions()) {
        // dY/dz_{t-k} picks up the two interaction terms touching z_{t-k},
        // each averaged over the partner assignment.
        if (k >= 1 && k <= band) v += m.beta_int(t, k) * design.mean(t - k + 1);
        if (k + 1 <= band && t - k - 1 >= 0) v += m.beta_int(t, k + 1) * design.mean(t - k - 1);
      }
      out.per_time(r, k) = v;
    }
  }
  out.tau = out.per_time.colwise().mean().transpose();
  if (m.has_interactions()) {
    out.per_time_int = Eigen::MatrixXd::Zero(n, K);
    for (int r = 0; r < n; ++r)
      for (int k = 1; k <= K; ++k)
        out.per_time_int(r, k - 1) = k <= band ? m.beta_int(K + r, k) : 0.0;
    out.tau_int = out.per_time_int.colwise().mean().transpose();
  }
  return out;
}

TrueEffects true_tau_ar(const ARPOModel& m, int K, int T) {
  std::vector<double> psi = impulse_responses(m.phi, K);
  TrueEffects out;
  out.per_time.resize(T - K, K + 1);
  out.tau.resize(K + 1);
  for (int k = 0; k <= K; ++k) out.tau[k] = psi[k] * (m.mu1 - m.mu0);
  for (int r = 0; r < T - K; ++r) out.per_time.row(r) = out.tau.transpose();
  return out;
}

TrueEffects true_tau_ma(const MAPOModel& m, int K, int T) {
  int q = static_cast<int>(m.theta.size()), n = T - K;
  TrueEffects out;
  out.per_time.resize(n, K + 1);
  for (int r = 0; r < n; ++r) {
    int t = K + r;
    out.per_time(r, 0) = (m.mu[t][1] - m.mu[t][0]) + (m.epsz[t][1] - m.epsz[t][0]);
    for (int k = 1; k <= K; ++k)
      out.per_time(r, k) =
          k <= q ? m.theta[k - 1] * (m.epsz[t - k][1] - m.epsz[t - k][0]) : 0.0;
  }
  out.tau = out.per_time.colwise().mean().transpose();
  return out;
}

}  // namespace

TrueEffects true_tau(const PotentialOutcomeModel& model, const AssignmentDesign& design, int K) {
  int T = model_length(model);
  if (design.length() != T) throw SpecError("true_tau: design length does not match model");
  if (K < 0 || K >= T) throw SpecError("true_tau: need 0 <= K < T");
  if (auto* m = std::get_if<LinearPOModel>(&model)) return true_tau_linear(*m, design, K);
  if (auto* m = std::get_if<ARPOModel>(&model)) return true_tau_ar(*m, K, T);
  return true_tau_ma(std::get<MAPOModel>(model), K, T);
}

double brute_force_tau(const PotentialOutcomeModel& model, const AssignmentDesign& design, int t,
                       int k) {
  if (design.kind() != DesignKind::binary) throw SpecError("brute_force_tau: binary designs only");
  int T = model_length(model);
  if (t < 0 || t >= T || k < 0 || k > t) throw SpecError("brute_force_tau: need 0 <= k <= t < T");
  if (t > 20) throw SpecError("brute_force_tau: enumeration capped at t = 20");

  // Average Y_t(z with z_{t-k}=1) - Y_t(z with z_{t-k}=0) over the other
  // coordinates z_0..z_t, weighted by their Bernoulli probabilities. Times
  // after t never influence Y_t, so they are left out of the enumeration.
  TreatmentPath path;
  path.z.assign(model_length(model), 0.0);
  double acc = 0.0;
  for (std::uint64_t a = 0; a < (1ull << t); ++a) {
    double pr = 1.0;
    int bit = 0;
    for (int s = 0; s <= t; ++s) {
      if (s == t - k) continue;
      bool on = (a >> bit++) & 1;
      path.z[s] = on ? 1.0 : 0.0;
      pr *= on ? design.prob(s) : 1.0 - design.prob(s);
    }
    path.z[t - k] = 1.0;
    double y1 = simulate(model, path)[t];
    path.z[t - k] = 0.0;
    double y0 = simulate(model, path)[t];
    acc += pr * (y1 - y0);
  }
  return acc;
}

std::vector<double> standard_normal_series(int T, std::uint64_t seed, double sd) {
  if (T < 0) throw SpecError("standard_normal_series: T must be nonnegative");
  Rng rng(seed);
  std::vector<double> out(T);
  for (int t = 0; t < T; ++t) out[t] = rng.normal(0.0, sd);
  return out;
}

}  // namespace switchback
