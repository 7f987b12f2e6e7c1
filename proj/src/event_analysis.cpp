#include "ulfkit/event_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ulfkit/errors.hpp"
#include "ulfkit/parallel.hpp"
#include "ulfkit/stats.hpp"

namespace ulfkit {
namespace {

constexpr std::size_t kMinEventLength = 1024;
constexpr double kDay = 86400.0;

void check_realization(const TimeSeries& r) {
  if (r.size() < kMinEventLength) {
    throw InvalidArgument("event realization needs at least " + std::to_string(kMinEventLength) + " bins, has " +
                          std::to_string(r.size()));
  }
  bool varies = false;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double v = r[i];
    if (v < 0.0 || v != std::floor(v)) {
      throw InvalidArgument("event realization: bin " + std::to_string(i) + " is not a non-negative count");
    }
    varies = varies || v != r[0];
  }
  if (!varies) {
    throw DegenerateInput("event realization is constant (every bin " + std::to_string(r[0]) +
                          "); the telegraph wave carries no spectrum");
  }
}

PsdOptions psd_options(const EventPsdOptions& o) {
  PsdOptions p;
  p.n_fft = o.n_fft;
  p.segments = 1;
  p.taper_fraction = o.taper_fraction;
  p.detrend_degree = 0;
  return p;
}

// Fisher-Yates with a plain modulo draw so replicates are identical across
// standard libraries.
void shuffle_bins(std::vector<double>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i-- > 1;) {
    const auto j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(v[i], v[j]);
  }
}

double parabolic_offset(double a, double b, double c) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0)) return 0.0;
  const double la = std::log(a), lb = std::log(b), lc = std::log(c);
  const double denom = la - 2.0 * lb + lc;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (la - lc) / denom, -0.5, 0.5);
}

}  // namespace

SpectralEstimate event_psd(const TimeSeries& realization, const EventPsdOptions& options) {
  check_realization(realization);
  auto est = psd(realization, psd_options(options));
  est.label = realization.label().empty() ? "events" : realization.label();
  return est;
}

SpectralEstimate event_psd(const EventSeries& events, const EventPsdOptions& options) {
  return event_psd(events.realization, options);
}

double max_bin_statistic(const SpectralEstimate& psd) {
  double m = 0.0;
  for (std::size_t k = 1; k < psd.values.size(); ++k) m = std::max(m, psd.values[k]);
  return m;
}

NullThreshold flat_null_threshold(const TimeSeries& realization, const EventPsdOptions& options, double alpha,
                                  std::size_t n_shuffles, std::uint64_t seed) {
  if (n_shuffles < 99) throw InvalidArgument("flat_null_threshold: n_shuffles must be >= 99");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("flat_null_threshold: alpha must be in [0, 1]");
  check_realization(realization);

  NullThreshold out;
  out.alpha = alpha;
  out.n_shuffles = n_shuffles;
  out.seed = seed;
  out.max_statistics.assign(n_shuffles, 0.0);
  const auto popts = psd_options(options);
  parallel_for(n_shuffles, [&](std::size_t b) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 rng(sq);
    auto v = realization.data();
    shuffle_bins(v, rng);
    out.max_statistics[b] = max_bin_statistic(psd(realization.with_values(std::move(v)), popts));
  });

  const auto k = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n_shuffles) - 1e-9));
  if (k == 0) {
    out.threshold = 0.0;
  } else {
    auto sorted = out.max_statistics;
    std::sort(sorted.begin(), sorted.end());
    out.threshold = sorted[std::min(k, n_shuffles) - 1];
  }
  return out;
}

HarmonicTable detect_harmonics(const SpectralEstimate& psd, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("detect_harmonics: threshold must be > 0");
  HarmonicTable table;
  table.grid = psd.grid;
  table.threshold = threshold;
  const auto& v = psd.values;
  const std::size_t n = v.size();
  if (n < 3) return table;

  const std::span<const double> body(v.data() + 1, n - 1);
  const double mu = mean(body);
  const double sd = stddev(body);
  const double df = psd.grid.df;

  for (std::size_t k = 1; k < n; ++k) {
    if (!(v[k] > threshold)) continue;
    const bool left_ok = v[k] > v[k - 1];
    const bool right_ok = k + 1 == n || v[k] >= v[k + 1];
    if (!left_ok || !right_ok) continue;
    Harmonic h;
    h.bin = k;
    const double delta = k + 1 < n ? parabolic_offset(v[k - 1], v[k], v[k + 1]) : 0.0;
    h.frequency = (static_cast<double>(k) + delta) * df;
    h.half_width = 0.5 * df;
    h.period = period_of(h.frequency);
    h.amplitude = v[k];
    h.z_score = sd > 0.0 ? (v[k] - mu) / sd : 0.0;
    table.lines.push_back(h);
  }
  return table;
}

std::string to_string(HarmonicSeries series) {
  switch (series) {
    case HarmonicSeries::f1:
      return "f1";
    case HarmonicSeries::f2:
      return "f2";
    case HarmonicSeries::splitting:
      return "splitting";
    case HarmonicSeries::unassigned:
      return "unassigned";
  }
  return "?";
}

std::size_t SeriesVerdict::count(HarmonicSeries series) const {
  return static_cast<std::size_t>(
      std::count_if(members.begin(), members.end(), [&](const SeriesMember& m) { return m.series == series; }));
}

SeriesVerdict harmonic_series_check(const HarmonicTable& table, const SeriesOptions& options) {
  if (table.lines.size() < 2) throw InvalidArgument("harmonic_series_check: need at least 2 lines");
  if (!(options.tolerance_bins > 0.0)) throw InvalidArgument("harmonic_series_check: tolerance must be > 0");
  const double df = table.grid.df;
  if (!(df > 0.0)) throw InvalidArgument("harmonic_series_check: table has no frequency grid");
  const double tol = options.tolerance_bins * df;
  const auto& lines = table.lines;

  SeriesVerdict out;
  out.tolerance_bins = options.tolerance_bins;
  out.df = df;

  std::optional<std::size_t> f1_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const double days = lines[i].period.days();
    if (days < options.f1_min_days || days > options.f1_max_days) continue;
    if (!f1_line || lines[i].amplitude > lines[*f1_line].amplitude) f1_line = i;
  }
  if (!f1_line) {
    throw DegenerateInput("harmonic_series_check: no line with period in [" + std::to_string(options.f1_min_days) +
                          ", " + std::to_string(options.f1_max_days) + "] days to serve as f1");
  }
  out.f1_line = *f1_line;
  out.f1 = lines[*f1_line].frequency;

  const double target = options.f2_multiple * out.f1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (std::abs(lines[i].frequency - target) > tol) continue;
    if (!out.f2_line || lines[i].amplitude > lines[*out.f2_line].amplitude) out.f2_line = i;
  }
  if (out.f2_line) {
    out.f2 = lines[*out.f2_line].frequency;
    out.ratio = *out.f2 / out.f1;
    out.deviation_bins = std::abs(*out.f2 - target) / df;
  }

  auto match = [&](double f, double base, int max_k, int& k_out, double& dev_out) {
    const auto k = static_cast<int>(std::lround(f / base));
    if (k < 1 || k > max_k) return false;
    const double dev = f - k * base;
    if (std::abs(dev) > tol) return false;
    k_out = k;
    dev_out = dev / df;
    return true;
  };

  out.members.resize(lines.size());
  std::vector<std::size_t> splitting;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto& m = out.members[i];
    m.line = i;
    const double f = lines[i].frequency;
    if (match(f, out.f1, options.f1_max_multiple, m.multiple, m.deviation)) {
      m.series = HarmonicSeries::f1;
    } else if (out.f2 && match(f, *out.f2, options.f2_max_multiple, m.multiple, m.deviation)) {
      m.series = HarmonicSeries::f2;
    } else if (out.f2 && f >= 23.0 * *out.f2 - tol && f <= 24.0 * *out.f2 + tol) {
      splitting.push_back(i);
    }
  }
  if (splitting.size() >= 2) {
    out.splitting_reported = true;
    for (auto i : splitting) out.members[i].series = HarmonicSeries::splitting;
  }
  return out;
}

NearMonthlyVerdict near_monthly_test(const SpectralEstimate& psd, double threshold, const NearMonthlyOptions& options) {
  if (!(options.min_period_days > 0.0 && options.max_period_days > options.min_period_days)) {
    throw InvalidArgument("near_monthly_test: need 0 < min_period_days < max_period_days");
  }
  const auto& grid = psd.grid;
  NearMonthlyVerdict out;
  out.f_lo = 1.0 / (options.max_period_days * kDay);
  out.f_hi = 1.0 / (options.min_period_days * kDay);
  out.threshold = threshold;
  if (out.f_hi > grid.fmax || out.f_lo < grid.df) {
    throw InvalidArgument("near_monthly_test: band " + format_period(options.min_period_days * kDay) + " .. " +
                          format_period(options.max_period_days * kDay) + " lies outside the grid [df = " +
                          std::to_string(grid.df) + " Hz, fmax = " + std::to_string(grid.fmax) + " Hz]");
  }
  out.first_bin = static_cast<std::size_t>(std::ceil(out.f_lo / grid.df - 1e-9));
  out.last_bin = static_cast<std::size_t>(std::floor(out.f_hi / grid.df + 1e-9));
  if (out.first_bin > out.last_bin) {
    throw InvalidArgument("near_monthly_test: band contains no frequency bin at df = " + std::to_string(grid.df) +
                          " Hz");
  }
  for (std::size_t k = out.first_bin; k <= out.last_bin; ++k) out.detected = out.detected || psd.values[k] > threshold;

  if (threshold > 0.0) {
    const double f_lunar = 1.0 / (options.lunar_period_days * kDay);
    const auto table = detect_harmonics(psd, threshold);
    for (const auto& h : table.lines) {
      if (h.frequency < out.f_lo - h.half_width || h.frequency > out.f_hi + h.half_width) continue;
      MonthlyLine ml;
      ml.line = h;
      ml.lunar_separation_bins = std::abs(h.frequency - f_lunar) / grid.df;
      ml.lunar_compatible = ml.lunar_separation_bins < options.lunar_tolerance_bins;
      out.lines.push_back(ml);
    }
  }
  return out;
}

}  // namespace ulfkit
