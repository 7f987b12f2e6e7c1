#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ulfkit/signal_model.hpp"
#include "ulfkit/spectral.hpp"

namespace ulfkit {

struct EventPsdOptions {
  std::size_t n_fft = 0;  // 0: next power of two >= realization length
  double taper_fraction = 0.0;
};

// One-sided PSD of the centered telegraph wave (binary) or count series.
SpectralEstimate event_psd(const TimeSeries& realization, const EventPsdOptions& options = {});
SpectralEstimate event_psd(const EventSeries& events, const EventPsdOptions& options = {});

struct NullThreshold {
  double threshold = 0.0;
  double alpha = 0.05;
  std::size_t n_shuffles = 0;
  std::uint64_t seed = 0;
  std::vector<double> max_statistics;  // one per shuffle, in replicate order
};

// Permutation null for a flat spectrum: shuffles the bins, recomputes the
// largest non-DC PSD value, and takes the (1 - alpha) empirical quantile of
// those maxima. A bin is significant when its PSD is strictly above it.
NullThreshold flat_null_threshold(const TimeSeries& realization, const EventPsdOptions& options, double alpha,
                                  std::size_t n_shuffles, std::uint64_t seed);

// Largest non-DC value of an event PSD; the statistic the null is built on.
double max_bin_statistic(const SpectralEstimate& psd);

struct Harmonic {
  std::size_t bin = 0;
  double frequency = 0.0;   // Hz, after parabolic refinement
  double half_width = 0.0;  // df / 2
  Period period;
  double amplitude = 0.0;   // PSD value at the peak bin
  double z_score = 0.0;     // (amplitude - mean) / std over the non-DC bins
};

struct HarmonicTable {
  FrequencyGrid grid;
  double threshold = 0.0;
  std::vector<Harmonic> lines;  // increasing frequency
};

// Local maxima strictly above threshold, refined by a 3-point parabola in
// log-PSD. DC is never reported.
HarmonicTable detect_harmonics(const SpectralEstimate& psd, double threshold);

enum class HarmonicSeries { f1, f2, splitting, unassigned };
std::string to_string(HarmonicSeries series);

struct SeriesMember {
  std::size_t line = 0;  // index into the table
  HarmonicSeries series = HarmonicSeries::unassigned;
  int multiple = 0;        // k in k * base; 0 when unassigned or splitting
  double deviation = 0.0;  // (f - k * base) / df
};

struct SeriesOptions {
  double tolerance_bins = 2.0;
  double f1_min_days = 5.0;  // f1 is the strongest line with period in this range
  double f1_max_days = 10.0;
  int f1_max_multiple = 7;
  int f2_multiple = 7;
  int f2_max_multiple = 24;
};

struct SeriesVerdict {
  double f1 = 0.0;
  std::size_t f1_line = 0;
  std::optional<double> f2;
  std::optional<std::size_t> f2_line;
  std::optional<double> ratio;
  double deviation_bins = 0.0;  // |f2 - 7 f1| / df when f2 exists
  double tolerance_bins = 2.0;
  double df = 0.0;
  std::vector<SeriesMember> members;  // one per table line, table order
  bool splitting_reported = false;    // >= 2 members in [23 f2, 24 f2]

  std::size_t count(HarmonicSeries series) const;
};

SeriesVerdict harmonic_series_check(const HarmonicTable& table, const SeriesOptions& options = {});

struct NearMonthlyOptions {
  double min_period_days = 29.5;
  double max_period_days = 30.5;
  double lunar_period_days = 29.530589;
  double lunar_tolerance_bins = 2.0;
};

struct MonthlyLine {
  Harmonic line;
  double lunar_separation_bins = 0.0;
  bool lunar_compatible = false;
};

struct NearMonthlyVerdict {
  double f_lo = 0.0;  // band edges, Hz
  double f_hi = 0.0;
  std::size_t first_bin = 0;
  std::size_t last_bin = 0;
  double threshold = 0.0;
  bool detected = false;  // some band bin exceeds the threshold
  std::vector<MonthlyLine> lines;
};

NearMonthlyVerdict near_monthly_test(const SpectralEstimate& psd, double threshold,
                                     const NearMonthlyOptions& options = {});

}  // namespace ulfkit
