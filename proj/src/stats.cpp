#include "switchback/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "switchback/errors.hpp"
#include "switchback/rng.hpp"

namespace switchback {

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw SpecError("normal_quantile: u must lie in (0, 1)");
  static const boost::math::normal_distribution<double> dist;
  return boost::math::quantile(dist, u);
}

double normal_cdf(double x) {
  static const boost::math::normal_distribution<double> dist;
  return boost::math::cdf(dist, x);
}

double chi_squared_upper_tail(double x, int df) {
  if (df < 1) throw SpecError("chi_squared_upper_tail: df must be positive");
  if (x <= 0.0) return 1.0;
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

double Rng::normal(double mean, double sd) {
  // Offset keeps u strictly inside (0, 1); exactly one state advance per call.
  double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  return mean + sd * normal_quantile(u);
}

}  // namespace switchback
