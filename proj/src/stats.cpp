#include "ulfkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ulfkit/errors.hpp"

namespace ulfkit {

double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of empty sequence");
  // Two-pass: the correction term removes most of the summation error.
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double c = 0.0;
  for (double v : x) c += v - m;
  return m + c / n;
}

double variance(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

double median(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("median of empty sequence");
  std::vector<double> v(x.begin(), x.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

CentralMoments central_moments(std::span<const double> x) {
  CentralMoments cm;
  cm.mean = mean(x);
  for (double v : x) {
    const double d = v - cm.mean;
    const double d2 = d * d;
    cm.m2 += d2;
    cm.m3 += d2 * d;
    cm.m4 += d2 * d2;
  }
  const double n = static_cast<double>(x.size());
  cm.m2 /= n;
  cm.m3 /= n;
  cm.m4 /= n;
  return cm;
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace ulfkit
