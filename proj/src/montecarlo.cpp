#include "switchback/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "switchback/dataset.hpp"
#include "switchback/errors.hpp"
#include "switchback/stats.hpp"

namespace switchback {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SWITCHBACK_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::min(resolve_threads(threads), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto work = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

namespace {

// Pairwise (recursive halving) reductions in index order, so sums do not
// depend on how work was split across threads.
Eigen::VectorXd row_sum(const Eigen::MatrixXd& m, int lo, int hi) {
  if (hi - lo == 1) return m.row(lo).transpose();
  int mid = lo + (hi - lo) / 2;
  return row_sum(m, lo, mid) + row_sum(m, mid, hi);
}

Eigen::VectorXd sq_dev_sum(const Eigen::MatrixXd& m, const Eigen::VectorXd& mean, int lo, int hi) {
  if (hi - lo == 1) {
    Eigen::VectorXd d = m.row(lo).transpose() - mean;
    return d.cwiseProduct(d);
  }
  int mid = lo + (hi - lo) / 2;
  return sq_dev_sum(m, mean, lo, mid) + sq_dev_sum(m, mean, mid, hi);
}

Eigen::MatrixXd outer_dev_sum(const Eigen::MatrixXd& m, const Eigen::VectorXd& mean, int lo,
                              int hi) {
  if (hi - lo == 1) {
    Eigen::VectorXd d = m.row(lo).transpose() - mean;
    return d * d.transpose();
  }
  int mid = lo + (hi - lo) / 2;
  return outer_dev_sum(m, mean, lo, mid) + outer_dev_sum(m, mean, mid, hi);
}

Eigen::MatrixXd mat_sum(const std::vector<Eigen::MatrixXd>& v, int lo, int hi) {
  if (hi - lo == 1) return v[lo];
  int mid = lo + (hi - lo) / 2;
  return mat_sum(v, lo, mid) + mat_sum(v, mid, hi);
}

double column_sum(const std::vector<std::vector<double>>& rows, int col, int lo, int hi) {
  if (hi - lo == 1) return rows[lo][col];
  int mid = lo + (hi - lo) / 2;
  return column_sum(rows, col, lo, mid) + column_sum(rows, col, mid, hi);
}

// True value targeted by coefficient column j of the fitted variant.
double column_truth(const TrueEffects& truth, const RegressionSpec& spec, int j) {
  switch (spec.variant) {
    case Variant::full:
      return truth.tau[j];
    case Variant::marginal:
      return truth.tau[spec.marginal_lag];
    case Variant::interaction:
      if (j <= spec.K) return truth.tau[j];
      if (truth.tau_int.size() == 0)
        throw SpecError("column_truth: model has no interaction estimands");
      return truth.tau_int[j - spec.K - 1];
    case Variant::exposure:
      throw SpecError("column_truth: exposure estimands have no closed form here");
  }
  throw SpecError("column_truth: unknown variant");
}

}  // namespace

ReplicationSet replicate(const ExperimentConfig& config, int T) {
  if (config.replications < 1) throw SpecError("replicate: need at least one replication");
  if (T <= config.reg.K) throw SpecError("replicate: T must exceed K");
  PotentialOutcomeModel model = config.make_model(T);
  AssignmentDesign design = config.make_design(T);
  if (model_length(model) != T || design.length() != T)
    throw SpecError("replicate: factories returned a length other than T");

  int R = config.replications;
  int P = variant_columns(config.reg);
  int n = T - config.reg.K;
  ReplicationSet rs;
  rs.T = T;
  rs.K = config.reg.K;
  rs.R = R;
  rs.tau_hat.resize(R, P);
  rs.se.resize(R, P);
  rs.seeds.resize(R);
  if (config.store_full_vhat) rs.vhat.resize(R);

  parallel_for(R, config.threads, [&](int r) {
    std::uint64_t seed = Rng::derive(config.root_seed, static_cast<std::uint64_t>(r));
    rs.seeds[r] = seed;
    TreatmentPath path = draw_assignment(design, seed);
    std::vector<double> y = simulate(model, path);
    EstimateResult res = estimate(y, path, design, config.reg);
    attach_hac(res, config.hac);
    rs.tau_hat.row(r) = res.tau_hat.transpose();
    for (int j = 0; j < P; ++j) rs.se(r, j) = std::sqrt(std::max(res.vhat(j, j), 0.0) / n);
    if (config.store_full_vhat) rs.vhat[r] = std::move(res.vhat);
  });

  rs.mean_tau = row_sum(rs.tau_hat, 0, R) / R;
  rs.sd_tau = R > 1 ? (sq_dev_sum(rs.tau_hat, rs.mean_tau, 0, R) / (R - 1)).cwiseSqrt().eval()
                    : Eigen::VectorXd::Zero(P).eval();
  if (config.store_full_vhat) rs.mean_vhat = mat_sum(rs.vhat, 0, R) / R;
  return rs;
}

Eigen::MatrixXd oracle_V(const ExperimentConfig& config, int T, int R_mc) {
  if (R_mc < 2) throw SpecError("oracle_V: need at least two draws");
  if (config.reg.variant != Variant::full || config.reg.h)
    throw SpecError("oracle_V: defined for the plain full regression");
  PotentialOutcomeModel model = config.make_model(T);
  AssignmentDesign design = config.make_design(T);
  int K = config.reg.K, n = T - K, P = K + 1;
  TrueEffects truth = true_tau(model, design, K);
  std::vector<double> w = lag_weights(design, K);

  // Seed stream disjoint from replicate's: same derive rule, offset root.
  std::uint64_t root = config.root_seed ^ 0x6f7261636c65ull;
  Eigen::MatrixXd scores(R_mc, P);
  parallel_for(R_mc, config.threads, [&](int r) {
    TreatmentPath path = draw_assignment(design, Rng::derive(root, static_cast<std::uint64_t>(r)));
    std::vector<double> y = simulate(model, path);
    NormalizedPath zt = normalize(path, design);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(P);
    for (int row = 0; row < n; ++row) {
      int t = K + row;
      double u = y[t];
      for (int l = 0; l <= K; ++l) u -= zt.z[t - l] * w[l] * truth.tau[l];
      for (int k = 0; k <= K; ++k) g[k] += zt.z[t - k] * u;
    }
    scores.row(r) = g.transpose() / std::sqrt(static_cast<double>(n));
  });

  Eigen::VectorXd mean = row_sum(scores, 0, R_mc) / R_mc;
  return outer_dev_sum(scores, mean, 0, R_mc) / (R_mc - 1);
}

CoverageTable coverage_table(const ExperimentConfig& config, double level) {
  if (!(level > 0.0 && level < 1.0)) throw SpecError("coverage_table: level in (0,1)");
  if (config.T_values.empty()) throw SpecError("coverage_table: no T values");
  int P = variant_columns(config.reg);
  CoverageTable table;
  table.level = level;
  table.T_values = config.T_values;
  table.coverage.resize(config.T_values.size(), P);
  double q = normal_quantile(0.5 + level / 2.0);

  for (std::size_t i = 0; i < config.T_values.size(); ++i) {
    int T = config.T_values[i];
    TrueEffects truth =
        true_tau(config.make_model(T), config.make_design(T), config.reg.K);
    ReplicationSet rs = replicate(config, T);
    for (int j = 0; j < P; ++j) {
      double target = column_truth(truth, config.reg, j);
      int hits = 0;
      for (int r = 0; r < rs.R; ++r) {
        double half = q * rs.se(r, j);
        if (rs.tau_hat(r, j) - half <= target && target <= rs.tau_hat(r, j) + half) ++hits;
      }
      table.coverage(i, j) = static_cast<double>(hits) / rs.R;
    }
  }
  return table;
}

ErrorCurves error_curves(const ExperimentConfig& config, int R_mc) {
  if (config.T_values.empty()) throw SpecError("error_curves: no T values");
  if (config.reg.variant != Variant::full || config.reg.h)
    throw SpecError("error_curves: defined for the plain full regression");
  ErrorCurves out;
  out.T_values = config.T_values;
  int K = config.reg.K, P = K + 1;

  for (int T : config.T_values) {
    PotentialOutcomeModel model = config.make_model(T);
    AssignmentDesign design = config.make_design(T);
    int n = T - K;
    TrueEffects truth = true_tau(model, design, K);
    Eigen::VectorXd tau = truth.tau;

    std::vector<int> grid{0, 1, 5, bandwidth_rule(T)};
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    grid.erase(std::remove_if(grid.begin(), grid.end(), [&](int L) { return L >= n; }),
               grid.end());
    int Lmax = grid.back();
    int nL = static_cast<int>(grid.size());

    Eigen::MatrixXd V = oracle_V(config, T, R_mc);
    double vnorm = V.norm();

    int R = config.replications;
    std::vector<double> l2(R);
    std::vector<std::vector<double>> frob(R, std::vector<double>(nL));
    parallel_for(R, config.threads, [&](int r) {
      TreatmentPath path =
          draw_assignment(design, Rng::derive(config.root_seed, static_cast<std::uint64_t>(r)));
      std::vector<double> y = simulate(model, path);
      EstimateResult res = estimate(y, path, design, config.reg);
      l2[r] = (res.tau_hat - tau).norm();
      std::vector<Eigen::MatrixXd> gammas =
          score_autocovariances(res.X, res.residuals, Lmax);
      for (int li = 0; li < nL; ++li) {
        Eigen::MatrixXd vhat =
            assemble_hac(gammas, res.X, res.weights, grid[li], config.hac.kernel);
        double err = (vhat - V).norm();
        frob[r][li] = vnorm > 0.0 ? err / vnorm : err;
      }
    });

    out.l2.push_back(l2);
    std::vector<double> sorted = l2;
    std::sort(sorted.begin(), sorted.end());
    out.l2_median.push_back(R % 2 ? sorted[R / 2]
                                  : (sorted[R / 2 - 1] + sorted[R / 2]) / 2.0);
    out.bandwidths.push_back(grid);
    std::vector<double> means(nL);
    for (int li = 0; li < nL; ++li) means[li] = column_sum(frob, li, 0, R) / R;
    out.frobenius.push_back(means);
  }
  return out;
}

AnalyticVariances analytic_variances(const std::vector<double>& beta,
                                     const std::vector<double>& beta_int,
                                     const std::vector<double>& eps, int T, int K, double p) {
  if (beta.empty()) throw SpecError("analytic_variances: need beta coefficients");
  if (static_cast<int>(eps.size()) != T)
    throw SpecError("analytic_variances: eps must have length T");
  if (K < 0 || K >= T) throw SpecError("analytic_variances: need 0 <= K < T");
  if (!(p > 0.0 && p < 1.0)) throw SpecError("analytic_variances: p in (0,1)");
  double v = p * (1.0 - p);
  int n = T - K;
  auto b = [&](int l) { return l >= 0 && l < static_cast<int>(beta.size()) ? beta[l] : 0.0; };
  auto g = [&](int l) {
    return l >= 1 && l < static_cast<int>(beta_int.size()) ? beta_int[l] : 0.0;
  };

  AnalyticVariances out;
  out.marginal.assign(K + 1, 0.0);
  double full = 0.0, with_i = 0.0, without_i = 0.0;

  // Running sums over the displayed index ranges; t is 1-based so eps[t-1]
  // is the error entering outcome t.
  double cum_b = 0.0, cum_g = 0.0;   // sum_{k<t} b_k, sum_{1<=k<t} g_{k-1,k}
  double sq_all = 0.0;               // sum_{l<t} b_l^2
  double sq_tail = 0.0;              // sum_{K<l<t} b_l^2
  double s1 = 0.0;                   // sq_tail + p^2 (g_{l-1,l}^2 + g_{l,l+1}^2) terms
  double sq_g_tail = 0.0;            // sum_{K<l<t} g_{l-1,l}^2
  double sq_g_all = 0.0;             // sum_{1<=l<t} g_{l-1,l}^2
  for (int k = 0; k <= K; ++k) cum_b += b(k), sq_all += b(k) * b(k);
  for (int k = 1; k <= K; ++k) cum_g += g(k), sq_g_all += g(k) * g(k);

  for (int t = K + 1; t <= T; ++t) {
    if (t > K + 1) {
      int l = t - 1;  // the index newly inside every "< t" range
      cum_b += b(l);
      sq_all += b(l) * b(l);
      sq_tail += b(l) * b(l);
      s1 += b(l) * b(l) + p * p * (g(l) * g(l) + g(l + 1) * g(l + 1));
      sq_g_tail += g(l) * g(l);
      cum_g += g(l);
      sq_g_all += g(l) * g(l);
    }
    double lev = p * cum_b + eps[t - 1];
    double lev_i = p * cum_b + p * p * cum_g + eps[t - 1];
    full += sq_tail + lev * lev / v;
    for (int k = 0; k <= K; ++k) out.marginal[k] += sq_all - b(k) * b(k) + lev * lev / v;
    with_i += s1 + v * sq_g_tail + lev_i * lev_i / v;
    without_i += s1 + v * sq_g_all + lev_i * lev_i / v;
  }

  out.full = full / n;
  for (double& m : out.marginal) m /= n;
  out.with_interaction = with_i / n;
  out.without_interaction = without_i / n;
  return out;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open " + path + " for writing");
  return f;
}

}  // namespace

void write_replications_csv(const std::string& path, const ReplicationSet& rs) {
  std::ofstream f = open_out(path);
  f << "replication,lag,tau_hat,se\n";
  for (int r = 0; r < rs.R; ++r)
    for (int j = 0; j < rs.tau_hat.cols(); ++j)
      f << r << ',' << j << ',' << g17(rs.tau_hat(r, j)) << ',' << g17(rs.se(r, j)) << '\n';
}

void write_coverage_csv(const std::string& path, const CoverageTable& table) {
  std::ofstream f = open_out(path);
  f << "T,lag,coverage\n";
  for (std::size_t i = 0; i < table.T_values.size(); ++i)
    for (int j = 0; j < table.coverage.cols(); ++j)
      f << table.T_values[i] << ',' << j << ',' << g17(table.coverage(i, j)) << '\n';
}

void write_consistency_csv(const std::string& path, const ErrorCurves& curves) {
  std::ofstream f = open_out(path);
  f << "T,replication,l2\n";
  for (std::size_t i = 0; i < curves.T_values.size(); ++i)
    for (std::size_t r = 0; r < curves.l2[i].size(); ++r)
      f << curves.T_values[i] << ',' << r << ',' << g17(curves.l2[i][r]) << '\n';
}

void write_frobenius_csv(const std::string& path, const ErrorCurves& curves) {
  std::ofstream f = open_out(path);
  f << "T,bandwidth,frobenius\n";
  for (std::size_t i = 0; i < curves.T_values.size(); ++i)
    for (std::size_t li = 0; li < curves.bandwidths[i].size(); ++li)
      f << curves.T_values[i] << ',' << curves.bandwidths[i][li] << ','
        << g17(curves.frobenius[i][li]) << '\n';
}

}  // namespace switchback
