#include "switchback/regression.hpp"

#include <string>

#include "switchback/errors.hpp"

namespace switchback {

int variant_columns(const RegressionSpec& spec) {
  switch (spec.variant) {
    case Variant::full:
      return spec.K + 1;
    case Variant::marginal:
      return 1;
    case Variant::interaction:
      return 2 * spec.K + 1;
    case Variant::exposure:
      if (!spec.exposure) throw SpecError("variant_columns: exposure variant without a mapping");
      return spec.exposure->S() + 1;
  }
  throw SpecError("variant_columns: unknown variant");
}

LaggedDesign build_design(const NormalizedPath& zt, int K, Variant variant, int marginal_lag) {
  int T = static_cast<int>(zt.z.size());
  if (K < 0 || K >= T) throw SpecError("build_design: need 0 <= K < T");
  if (variant == Variant::exposure)
    throw SpecError("build_design: exposure designs come from exposure_transform");
  if (variant == Variant::marginal && (marginal_lag < 0 || marginal_lag > K))
    throw SpecError("build_design: marginal lag outside 0..K");
  int n = T - K;

  LaggedDesign out;
  out.K = K;
  out.variant = variant;
  if (variant == Variant::marginal) {
    out.X.resize(n, 1);
    for (int r = 0; r < n; ++r) out.X(r, 0) = zt.z[K + r - marginal_lag];
    return out;
  }
  int P = variant == Variant::interaction ? 2 * K + 1 : K + 1;
  out.X.resize(n, P);
  for (int r = 0; r < n; ++r) {
    int t = K + r;
    for (int k = 0; k <= K; ++k) out.X(r, k) = zt.z[t - k];
    if (variant == Variant::interaction)
      for (int k = 1; k <= K; ++k) out.X(r, K + k) = zt.z[t - k] * zt.z[t - k + 1];
  }
  return out;
}

OlsSolution ols_no_intercept(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw SpecError("ols: row mismatch between X and y");
  if (X.rows() < X.cols()) throw NumericError("ols: fewer rows than columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    // First pivot outside the independent set is the offending column.
    int col = qr.colsPermutation().indices()[qr.rank()];
    throw NumericError("ols: design is rank deficient; column " + std::to_string(col) +
                       " is linearly dependent on the others");
  }

  OlsSolution sol;
  sol.coef = qr.solve(y);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(X.transpose() * X);
  double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  sol.gram_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return sol;
}

Eigen::VectorXd rescale(const Eigen::VectorXd& tau_tilde, const std::vector<double>& weights) {
  if (tau_tilde.size() != static_cast<Eigen::Index>(weights.size()))
    throw SpecError("rescale: weight count does not match coefficients");
  Eigen::VectorXd out(tau_tilde.size());
  for (Eigen::Index j = 0; j < tau_tilde.size(); ++j) {
    if (!(weights[j] > 0.0)) throw SpecError("rescale: weights must be positive");
    out[j] = tau_tilde[j] / weights[j];
  }
  return out;
}

EstimateResult estimate(const std::vector<double>& y, const TreatmentPath& path,
                        const AssignmentDesign& design, const RegressionSpec& spec) {
  int T = design.length();
  if (static_cast<int>(y.size()) != T) throw SpecError("estimate: y length does not match design");
  if (static_cast<int>(path.z.size()) != T)
    throw SpecError("estimate: path length does not match design");
  if (spec.K < 0 || spec.K >= T) throw SpecError("estimate: need 0 <= K < T");
  if (spec.h && spec.variant != Variant::full)
    throw SpecError("estimate: row scaling is defined for the full variant only");
  int n = T - spec.K;

  EstimateResult res;
  res.T = T;
  res.K = spec.K;
  res.variant = spec.variant;

  Eigen::MatrixXd X;
  if (spec.variant == Variant::exposure) {
    if (!spec.exposure) throw SpecError("estimate: exposure variant without a mapping");
    if (spec.exposure->K() != spec.K)
      throw SpecError("estimate: exposure boundaries must end at K");
    ExposureColumns cols = exposure_transform(path, design, *spec.exposure);
    X = cols.gtilde;
    res.weights = cols.weights;
  } else {
    NormalizedPath zt = normalize(path, design);
    X = build_design(zt, spec.K, spec.variant, spec.marginal_lag).X;
    switch (spec.variant) {
      case Variant::full:
        res.weights = lag_weights(design, spec.K);
        break;
      case Variant::marginal: {
        std::vector<double> all = lag_weights(design, spec.K);
        res.weights = {all[spec.marginal_lag]};
        break;
      }
      case Variant::interaction: {
        res.weights = lag_weights(design, spec.K);
        std::vector<double> wi = interaction_weights(design, spec.K);
        res.weights.insert(res.weights.end(), wi.begin(), wi.end());
        break;
      }
      default:
        break;
    }
  }

  Eigen::VectorXd yk(n);
  for (int r = 0; r < n; ++r) yk[r] = y[spec.K + r];

  if (spec.h) {
    if (static_cast<int>(spec.h->size()) != n)
      throw SpecError("estimate: h needs one entry per estimation row");
    // Scale the regressor rows only; the outcome stays raw, so the fit
    // targets the h-weighted estimand (T-K)^{-1} sum_t h_t tau_{t,k}.
    for (int r = 0; r < n; ++r) X.row(r) *= (*spec.h)[r];
    res.weights = generalized_weights(design, *spec.h, spec.K);
  }

  OlsSolution sol = ols_no_intercept(X, yk);
  res.tau_tilde = sol.coef;
  res.tau_hat = rescale(sol.coef, res.weights);
  res.residuals = yk - X * sol.coef;
  res.X = std::move(X);
  res.gram_condition = sol.gram_condition;
  res.condition_warning = sol.gram_condition > 1e8;
  return res;
}

double wls_lag0(const std::vector<double>& y, const TreatmentPath& path,
                const AssignmentDesign& design) {
  int T = design.length();
  if (static_cast<int>(y.size()) != T || static_cast<int>(path.z.size()) != T)
    throw SpecError("wls_lag0: length mismatch");
  double num = 0.0, den = 0.0;
  for (int t = 0; t < T; ++t) {
    double d = path.z[t] - design.mean(t);
    num += d / design.variance(t) * y[t];
    den += d * d / design.variance(t);
  }
  if (den <= 0.0) throw NumericError("wls_lag0: degenerate path, no variation in z");
  return num / den;
}

}  // namespace switchback
