#pragma once

#include <cmath>
#include <cstdint>

namespace rcrs {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval for k successes out of n; z = 1.96 gives 95%.
inline Interval wilson_interval(std::int64_t k, std::int64_t n, double z = 1.959963984540054) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval iv{center - half, center + half};
  // Guard rounding so the interval always contains the point estimate.
  if (iv.lo > p) iv.lo = p;
  if (iv.hi < p) iv.hi = p;
  if (iv.lo < 0.0) iv.lo = 0.0;
  if (iv.hi > 1.0) iv.hi = 1.0;
  return iv;
}

// Standard error of a binomial proportion from its observed variance.
inline double binomial_sigma(std::int64_t k, std::int64_t n) {
  if (n <= 0) return 0.0;
  const double p = static_cast<double>(k) / static_cast<double>(n);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// Running mean/variance (Welford), mergeable in a fixed order.
struct MeanAccumulator {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const MeanAccumulator& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double nn = static_cast<double>(n + o.n);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / nn;
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / nn;
    n += o.n;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

}  // namespace rcrs
