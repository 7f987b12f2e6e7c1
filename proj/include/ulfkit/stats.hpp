#pragma once

#include <span>
#include <vector>

namespace ulfkit {

double mean(std::span<const double> x);
// Population (divide by N) variance and standard deviation.
double variance(std::span<const double> x);
double stddev(std::span<const double> x);
double median(std::span<const double> x);

struct CentralMoments {
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};
CentralMoments central_moments(std::span<const double> x);

// Two-sided p-value of a standard normal statistic.
double normal_two_sided_p(double z);

}  // namespace ulfkit
