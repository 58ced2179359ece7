#pragma once

namespace switchback {

// Standard normal inverse CDF, u in (0, 1).
double normal_quantile(double u);

// Standard normal CDF.
double normal_cdf(double x);

// P[X > x] for X ~ chi-squared(df). Returns 1 for x <= 0.
double chi_squared_upper_tail(double x, int df);

}  // namespace switchback
