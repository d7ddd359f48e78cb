#ifndef WWL_STATS_HPP
#define WWL_STATS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace wwl {

enum class TTestStatus {
  Ok,
  AllEqual,          // every difference is zero
  ZeroVariancePositive,
  ZeroVarianceNegative,
};

struct TTestResult {
  double t = 0.0;
  double p_value = 0.5;
  std::size_t dof = 0;
  double mean_difference = 0.0;
  TTestStatus status = TTestStatus::Ok;
};

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

/// One-sided paired t-test of H1: mean(a - b) > 0.
inline TTestResult paired_ttest_onesided(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired t-test: samples must have equal length");
  if (a.size() < 2) throw std::invalid_argument("paired t-test: need at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  TTestResult r;
  r.dof = d.size() - 1;
  r.mean_difference = mean(d);
  const double sd = stddev(d);
  if (sd == 0.0) {
    if (r.mean_difference == 0.0) {
      r.status = TTestStatus::AllEqual;
      r.p_value = 0.5;
      r.t = 0.0;
    } else if (r.mean_difference > 0.0) {
      r.status = TTestStatus::ZeroVariancePositive;
      r.p_value = 0.0;
      r.t = std::numeric_limits<double>::infinity();
    } else {
      r.status = TTestStatus::ZeroVarianceNegative;
      r.p_value = 1.0;
      r.t = -std::numeric_limits<double>::infinity();
    }
    return r;
  }
  r.t = r.mean_difference / (sd / std::sqrt(static_cast<double>(d.size())));
  boost::math::students_t dist(static_cast<double>(r.dof));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.t));
  return r;
}

}  // namespace wwl

#endif  // WWL_STATS_HPP
