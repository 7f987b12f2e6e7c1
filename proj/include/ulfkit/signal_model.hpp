#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ulfkit {

// Uniformly sampled real-valued realization.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> values, double dt, double t0 = 0.0,
             std::string label = {});

  std::span<const double> values() const { return values_; }
  const std::vector<double>& data() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double dt() const { return dt_; }
  double t0() const { return t0_; }
  const std::string& label() const { return label_; }

  // (len - 1) * dt
  double duration() const;
  double end_time() const { return t0_ + duration(); }
  double time_at(std::size_t i) const { return t0_ + static_cast<double>(i) * dt_; }

  // Same sampling metadata, new samples.
  TimeSeries with_values(std::vector<double> values) const;
  TimeSeries slice(std::size_t first, std::size_t count) const;

 private:
  std::vector<double> values_;
  double dt_;
  double t0_;
  std::string label_;
};

// One-sided frequency axis of an n_fft-point transform. Bins run 0..n_bins
// inclusive, so bin n_bins sits on fmax.
struct FrequencyGrid {
  double df = 0.0;
  double fmax = 0.0;
  std::size_t n_bins = 0;
  std::size_t n_fft = 0;
  double dt = 0.0;

  double frequency(std::size_t bin) const { return static_cast<double>(bin) * df; }
  std::size_t bin_count() const { return n_bins + 1; }
  std::size_t nearest_bin(double frequency_hz) const;
};

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

FrequencyGrid frequency_grid(std::size_t n_fft, double dt);

struct Period {
  double seconds = 0.0;

  double hours() const { return seconds / 3600.0; }
  double days() const { return seconds / 86400.0; }
  double years() const { return seconds / (365.25 * 86400.0); }
  // Picks years, days or hours like a harmonic table would ("7.00171 d").
  std::string human() const;
};

Period period_of(double frequency_hz);
double frequency_of(const Period& period);
std::string format_period(double seconds);

// Output process plus its ordered input processes, cut to a common window.
class ProcessComplex {
 public:
  ProcessComplex(TimeSeries output, std::vector<TimeSeries> inputs);

  const TimeSeries& output() const { return channels_.front(); }
  std::span<const TimeSeries> inputs() const {
    return std::span<const TimeSeries>(channels_).subspan(1);
  }
  // Output first, then inputs in order.
  const std::vector<TimeSeries>& channels() const { return channels_; }
  std::size_t channel_count() const { return channels_.size(); }
  double dt() const { return channels_.front().dt(); }
  std::size_t length() const { return channels_.front().size(); }

 private:
  std::vector<TimeSeries> channels_;
};

enum class EventMode { binary, count };

struct EventSeries {
  std::vector<double> timestamps;
  double bin_width = 3600.0;
  EventMode mode = EventMode::binary;
  TimeSeries realization;
};

// Bin k covers [t_start + k*w, t_start + (k+1)*w). Events at or beyond
// t_end are rejected.
EventSeries bin_events(std::vector<double> timestamps, double bin_width,
                       EventMode mode, double t_start, double t_end);

EventMode parse_event_mode(const std::string& name);
std::string to_string(EventMode mode);

}  // namespace ulfkit
