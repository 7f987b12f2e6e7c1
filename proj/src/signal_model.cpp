#include "ulfkit/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ulfkit/errors.hpp"

namespace ulfkit {

TimeSeries::TimeSeries(std::vector<double> values, double dt, double t0, std::string label)
    : values_(std::move(values)), dt_(dt), t0_(t0), label_(std::move(label)) {
  if (values_.empty()) throw InvalidArgument("TimeSeries: values must be non-empty");
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw InvalidArgument("TimeSeries: dt must be > 0");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgument("TimeSeries: non-finite sample at index " + std::to_string(i));
    }
  }
}

double TimeSeries::duration() const {
  return static_cast<double>(values_.size() - 1) * dt_;
}

TimeSeries TimeSeries::with_values(std::vector<double> values) const {
  return TimeSeries(std::move(values), dt_, t0_, label_);
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > values_.size() || count == 0) {
    throw InvalidArgument("TimeSeries::slice: range out of bounds");
  }
  std::vector<double> part(values_.begin() + static_cast<std::ptrdiff_t>(first),
                           values_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return TimeSeries(std::move(part), dt_, time_at(first), label_);
}

std::size_t FrequencyGrid::nearest_bin(double frequency_hz) const {
  const double k = std::round(frequency_hz / df);
  if (k <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(k), n_bins);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

FrequencyGrid frequency_grid(std::size_t n_fft, double dt) {
  if (n_fft < 4 || !is_power_of_two(n_fft)) {
    throw InvalidArgument("frequency_grid: n_fft must be a power of two >= 4, got " +
                          std::to_string(n_fft));
  }
  if (!(dt > 0.0)) throw InvalidArgument("frequency_grid: dt must be > 0");
  FrequencyGrid grid;
  grid.n_fft = n_fft;
  grid.n_bins = n_fft / 2;
  grid.dt = dt;
  grid.fmax = 1.0 / (2.0 * dt);
  grid.df = 1.0 / (static_cast<double>(n_fft) * dt);
  return grid;
}

std::string format_period(double seconds) {
  char buf[64];
  const double hours = seconds / 3600.0;
  const double days = seconds / 86400.0;
  const double years = days / 365.25;
  if (years >= 1.0) {
    std::snprintf(buf, sizeof buf, "%.5f years", years);
  } else if (days >= 3.0) {
    std::snprintf(buf, sizeof buf, "%.5f d", days);
  } else if (hours >= 1.0) {
    std::snprintf(buf, sizeof buf, "%.5f h", hours);
  } else {
    std::snprintf(buf, sizeof buf, "%.6g s", seconds);
  }
  return buf;
}

std::string Period::human() const { return format_period(seconds); }

Period period_of(double frequency_hz) {
  if (!(frequency_hz > 0.0)) {
    throw InvalidArgument("period_of: frequency must be > 0");
  }
  return Period{1.0 / frequency_hz};
}

double frequency_of(const Period& period) {
  if (!(period.seconds > 0.0)) throw InvalidArgument("frequency_of: period must be > 0");
  return 1.0 / period.seconds;
}

ProcessComplex::ProcessComplex(TimeSeries output, std::vector<TimeSeries> inputs) {
  std::vector<TimeSeries> all;
  all.reserve(inputs.size() + 1);
  all.push_back(std::move(output));
  for (auto& s : inputs) all.push_back(std::move(s));

  const double dt = all.front().dt();
  double start = all.front().t0();
  double end = all.front().end_time();
  for (const auto& s : all) {
    if (std::abs(s.dt() - dt) > 1e-9 * dt) {
      throw InvalidArgument("ProcessComplex: channel '" + s.label() +
                            "' has a different sampling step");
    }
    start = std::max(start, s.t0());
    end = std::min(end, s.end_time());
  }
  if (end < start) throw InvalidArgument("ProcessComplex: channels do not overlap in time");

  const auto count = static_cast<std::size_t>(std::floor((end - start) / dt + 1e-9)) + 1;
  channels_.reserve(all.size());
  for (const auto& s : all) {
    const double offset = (start - s.t0()) / dt;
    const auto first = static_cast<std::size_t>(std::llround(offset));
    if (std::abs(offset - static_cast<double>(first)) > 1e-6) {
      throw InvalidArgument("ProcessComplex: channel '" + s.label() +
                            "' is not aligned to the common sampling grid");
    }
    const std::size_t n = std::min(count, s.size() - first);
    channels_.push_back(s.slice(first, n));
  }
  const std::size_t common = std::min_element(channels_.begin(), channels_.end(),
                                              [](const auto& a, const auto& b) {
                                                return a.size() < b.size();
                                              })->size();
  for (auto& c : channels_) {
    if (c.size() != common) c = c.slice(0, common);
  }
}

EventSeries bin_events(std::vector<double> timestamps, double bin_width, EventMode mode,
                       double t_start, double t_end) {
  if (!(bin_width > 0.0)) throw InvalidArgument("bin_events: bin_width must be > 0");
  if (!(t_end > t_start)) throw InvalidArgument("bin_events: empty span");
  std::sort(timestamps.begin(), timestamps.end());

  std::vector<double> outside;
  for (double t : timestamps) {
    if (!(t >= t_start && t < t_end)) outside.push_back(t);
  }
  if (!outside.empty()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "bin_events: timestamps outside span [" << t_start << ", " << t_end << "):";
    for (std::size_t i = 0; i < outside.size() && i < 10; ++i) msg << ' ' << outside[i];
    if (outside.size() > 10) msg << " ... (" << outside.size() << " total)";
    throw InvalidArgument(msg.str());
  }

  const auto n_bins =
      static_cast<std::size_t>(std::ceil((t_end - t_start) / bin_width - 1e-12));
  std::vector<double> bins(std::max<std::size_t>(n_bins, 1), 0.0);
  for (double t : timestamps) {
    auto k = static_cast<std::size_t>(std::floor((t - t_start) / bin_width));
    k = std::min(k, bins.size() - 1);
    if (mode == EventMode::binary) {
      bins[k] = 1.0;
    } else {
      bins[k] += 1.0;
    }
  }
  EventSeries ev{std::move(timestamps), bin_width, mode,
                 TimeSeries(std::move(bins), bin_width, t_start, "events")};
  return ev;
}

EventMode parse_event_mode(const std::string& name) {
  if (name == "binary") return EventMode::binary;
  if (name == "count") return EventMode::count;
  throw InvalidArgument("unknown event mode '" + name + "' (expected binary or count)");
}

std::string to_string(EventMode mode) {
  return mode == EventMode::binary ? "binary" : "count";
}

}  // namespace ulfkit
