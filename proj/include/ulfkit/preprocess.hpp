#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ulfkit/signal_model.hpp"

namespace ulfkit {

// Everything needed to replay conditioning on the raw series.
struct PreprocessReport {
  // Trend in t = index * dt, ascending degree. Informational: long records make
  // this basis ill-conditioned, so replay uses the scaled form below.
  std::vector<double> removed_trend;
  // Same trend in u = 2 * index / (len - 1) - 1.
  std::vector<double> trend_scaled;
  int detrend_degree = -1;
  double original_mean = 0.0;
  double original_std = 1.0;
  double taper_fraction = 0.0;
  double taper_power_correction = 1.0;
  std::vector<std::string> steps;
};

std::pair<TimeSeries, PreprocessReport> center_normalize(const TimeSeries& series);

struct DetrendResult {
  TimeSeries residual;
  std::vector<double> coefficients;  // ascending, in t = index * dt
  std::vector<double> scaled_coefficients;
};

DetrendResult detrend(const TimeSeries& series, int degree);

// Tukey window: raised-cosine ramps over p/2 of the record at each end.
std::vector<double> cosine_taper_window(std::size_t n, double taper_fraction);
// Returns the tapered series and U = mean(w^2).
std::pair<TimeSeries, double> cosine_taper(const TimeSeries& series, double taper_fraction);

TimeSeries zero_pad(const TimeSeries& series, std::size_t n_fft);

// Causal convolution with zero initial state; output length = input length.
TimeSeries fir_filter(const TimeSeries& series, std::span<const double> taps);

struct ConditionOptions {
  int detrend_degree = -1;  // -1: none
  bool normalize = false;
  double taper_fraction = 0.0;
};

struct Conditioned {
  TimeSeries series;
  PreprocessReport report;
};

// detrend -> center/normalize -> taper, each optional.
Conditioned condition(const TimeSeries& raw, const ConditionOptions& options);
TimeSeries replay(const TimeSeries& raw, const PreprocessReport& report);

enum class StationarityQuantity { mean, variance };

struct StationarityVerdict {
  double statistic = 0.0;  // standardized reverse-arrangement count
  long long reverse_arrangements = 0;
  double p_value = 1.0;
  std::size_t n_segments = 0;
  StationarityQuantity quantity = StationarityQuantity::mean;
  double alpha = 0.05;
  bool pass = true;
};

// Reverse-arrangements trend test on block means or block variances.
StationarityVerdict stationarity_test(const TimeSeries& series, std::size_t n_segments,
                                      StationarityQuantity quantity, double alpha = 0.05);

// Count of pairs i < j with x[i] > x[j].
long long reverse_arrangements(std::span<const double> x);

struct ErgodicityVerdict {
  double statistic = 0.0;  // between/within dispersion ratio (F)
  double p_value = 1.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  double alpha = 0.05;
  bool pass = true;
};

// One-way dispersion analysis of per-member time averages.
ErgodicityVerdict ergodicity_check(std::span<const TimeSeries> ensemble, double alpha = 0.05);

}  // namespace ulfkit
