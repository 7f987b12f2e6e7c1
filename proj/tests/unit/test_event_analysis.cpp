#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ulfkit/errors.hpp"
#include "ulfkit/event_analysis.hpp"

using namespace ulfkit;

namespace {

constexpr double kHour = 3600.0;
constexpr double kDay = 86400.0;

TimeSeries random_events(std::mt19937_64& rng, std::size_t n, double p) {
  std::bernoulli_distribution b(p);
  std::vector<double> v(n);
  for (auto& x : v) x = b(rng) ? 1.0 : 0.0;
  return TimeSeries(v, kHour);
}

// Hourly sinusoids plus weak noise; Hann-tapered PSD so that lines are compact.
SpectralEstimate hourly_lines(const std::vector<double>& freqs, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto x = oracle::gaussian(rng, n, 0.01);
  for (std::size_t i = 0; i < n; ++i)
    for (double f : freqs) x[i] += std::sin(2.0 * std::numbers::pi * f * double(i) * kHour + 0.4);
  PsdOptions o;
  o.taper_fraction = 1.0;
  o.detrend_degree = 0;
  return psd(TimeSeries(x, kHour), o);
}

HarmonicTable table_of(const std::vector<double>& freqs, const std::vector<double>& amps, double df) {
  HarmonicTable t;
  t.grid.df = df;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    Harmonic h;
    h.frequency = freqs[i];
    h.bin = static_cast<std::size_t>(std::lround(freqs[i] / df));
    h.half_width = df / 2;
    h.period = period_of(freqs[i]);
    h.amplitude = amps[i];
    t.lines.push_back(h);
  }
  return t;
}

}  // namespace

TEST_CASE("event_psd: hourly grid at N = 65536") {
  std::mt19937_64 rng(1);
  const auto g = event_psd(random_events(rng, 65536, 0.1));
  CHECK(g.grid.fmax == doctest::Approx(138.8889e-6).epsilon(1e-6));
  CHECK(g.grid.df == doctest::Approx(4.2385e-9).epsilon(1e-4));
  CHECK(g.size() == 32769);
}

TEST_CASE("event_psd: validation") {
  std::mt19937_64 rng(2);
  CHECK_THROWS_AS(event_psd(random_events(rng, 512, 0.2)), InvalidArgument);
  CHECK_THROWS_AS(event_psd(TimeSeries(std::vector<double>(2048, 1.0), kHour)), DegenerateInput);
  CHECK_THROWS_AS(event_psd(TimeSeries(std::vector<double>(2048, 0.0), kHour)), DegenerateInput);
  auto v = random_events(rng, 2048, 0.2).data();
  v[7] = 0.5;
  CHECK_THROWS_AS(event_psd(TimeSeries(v, kHour)), InvalidArgument);
}

TEST_CASE("event_psd: a 24 h comb peaks at 1/24 h and its harmonics") {
  const std::size_t n = 8192;
  std::vector<double> stamps;
  for (std::size_t h = 0; h < n; h += 24) stamps.push_back(double(h) * kHour + 60.0);
  const auto ev = bin_events(stamps, kHour, EventMode::binary, 0.0, double(n) * kHour);
  const auto g = event_psd(ev);
  const auto fundamental = static_cast<std::size_t>(std::lround(double(n) * kHour / kDay));
  CHECK(fundamental == 341);
  // Largest bin below 1.5 / 24 h is the fundamental itself.
  const auto hi = static_cast<std::size_t>(1.5 * double(fundamental));
  const auto it = std::max_element(g.values.begin() + 1, g.values.begin() + static_cast<long>(hi));
  CHECK(static_cast<std::size_t>(it - g.values.begin()) == fundamental);
  CHECK(g.axis[fundamental] == doctest::Approx(1.0 / kDay).epsilon(1.0 / 341.0));

  const auto null = flat_null_threshold(ev.realization, {}, 0.05, 99, 11);
  CHECK(g.values[fundamental] > null.threshold);
  const auto table = detect_harmonics(g, null.threshold);
  const bool has_fundamental = std::any_of(table.lines.begin(), table.lines.end(),
                                           [&](const Harmonic& h) { return h.bin == fundamental; });
  CHECK(has_fundamental);
  const bool has_second = std::any_of(table.lines.begin(), table.lines.end(),
                                      [&](const Harmonic& h) { return h.bin == 683; });
  CHECK(has_second);
}

TEST_CASE("flat_null_threshold: quantile edges, determinism, validation") {
  std::mt19937_64 rng(3);
  const auto r = random_events(rng, 1024, 0.3);
  const auto a = flat_null_threshold(r, {}, 0.05, 99, 7);
  const auto b = flat_null_threshold(r, {}, 0.05, 99, 7);
  CHECK(a.max_statistics == b.max_statistics);
  CHECK(a.threshold == b.threshold);
  auto sorted = a.max_statistics;
  std::sort(sorted.begin(), sorted.end());
  CHECK(a.threshold == sorted[94]);  // ceil(0.95 * 99) = 95th order statistic

  CHECK(flat_null_threshold(r, {}, 1.0, 99, 7).threshold == 0.0);
  CHECK(flat_null_threshold(r, {}, 0.0, 99, 7).threshold == sorted.back());
  CHECK_THROWS_AS(flat_null_threshold(r, {}, 0.05, 98, 7), InvalidArgument);
  CHECK_THROWS_AS(flat_null_threshold(r, {}, 1.5, 99, 7), InvalidArgument);
  CHECK_THROWS_AS(flat_null_threshold(TimeSeries(std::vector<double>(1024, 0.0), kHour), {}, 0.05, 99, 7),
                  DegenerateInput);

  // Every shuffle keeps the event count, so each max statistic is a valid PSD maximum.
  for (double m : a.max_statistics) CHECK(m > 0.0);
}

TEST_CASE("flat_null_threshold: random events are detected at about the nominal rate") {
  std::mt19937_64 rng(4);
  int hits = 0;
  const int runs = 300;
  for (int r = 0; r < runs; ++r) {
    const auto x = random_events(rng, 1024, 0.2);
    const auto null = flat_null_threshold(x, {}, 0.05, 99, 1000 + r);
    hits += max_bin_statistic(event_psd(x)) > null.threshold ? 1 : 0;
  }
  const double rate = double(hits) / runs;
  CHECK(rate >= 0.012);
  CHECK(rate <= 0.088);
}

TEST_CASE("detect_harmonics: recovers the weekly and daily lines within 0.2%") {
  const double f1 = 1653.04e-9, f2 = 11575.48e-9;
  const auto g = hourly_lines({f1, f2}, 65536, 5);
  const auto table = detect_harmonics(g, 1e-3 * *std::max_element(g.values.begin(), g.values.end()));
  REQUIRE(table.lines.size() >= 2);
  for (std::size_t i = 1; i < table.lines.size(); ++i)
    CHECK(table.lines[i].frequency > table.lines[i - 1].frequency);
  auto nearest = [&](double f) {
    return *std::min_element(table.lines.begin(), table.lines.end(), [&](const Harmonic& a, const Harmonic& b) {
      return std::abs(a.frequency - f) < std::abs(b.frequency - f);
    });
  };
  const auto h1 = nearest(f1), h2 = nearest(f2);
  CHECK(std::abs(h1.frequency - f1) <= 0.002 * f1);
  CHECK(std::abs(h2.frequency - f2) <= 0.002 * f2);
  CHECK(h1.period.days() == doctest::Approx(7.0017).epsilon(0.002));
  CHECK(h2.period.hours() == doctest::Approx(23.997).epsilon(0.002));
  CHECK(h1.period.seconds * h1.frequency == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(h1.half_width == g.grid.df / 2);
  CHECK(h1.z_score > 10.0);
}

TEST_CASE("detect_harmonics: single line within a half bin, flat spectrum empty, errors") {
  const double f = 123.4 * 4.2385e-9 * 8.0;  // off-grid at N = 8192
  const auto g = hourly_lines({f}, 8192, 6);
  const double peak = *std::max_element(g.values.begin(), g.values.end());
  const auto table = detect_harmonics(g, 0.05 * peak);
  REQUIRE(table.lines.size() == 1);
  const auto& h = table.lines[0];
  CHECK(std::abs(double(h.bin) * g.grid.df - f) <= 0.5 * g.grid.df);
  CHECK(std::abs(h.period.seconds - 1.0 / f) <= 0.5 * g.grid.df / (f * f) * 1.01);
  CHECK(std::abs(h.frequency - f) < std::abs(double(h.bin) * g.grid.df - f) + 1e-15);

  SpectralEstimate flat = g;
  std::fill(flat.values.begin(), flat.values.end(), 1.0);
  CHECK(detect_harmonics(flat, 2.0).lines.empty());
  CHECK_THROWS_AS(detect_harmonics(g, 0.0), InvalidArgument);

  // DC is never reported.
  SpectralEstimate dc = flat;
  dc.values[0] = 100.0;
  CHECK(detect_harmonics(dc, 2.0).lines.empty());
}

TEST_CASE("harmonic_series_check: the weekly and daily bases form one series") {
  const auto grid = frequency_grid(65536, kHour);
  const double f1 = 1653.04e-9, f2 = 11575.48e-9;
  const auto table = table_of({1.0 / (1.24688 * 365.25 * kDay), f1, 2 * f1, 3 * f1, f2}, {2.0, 5.0, 1.0, 1.0, 8.0}, grid.df);
  const auto v = harmonic_series_check(table);
  CHECK(v.f1 == f1);
  REQUIRE(v.f2.has_value());
  CHECK(*v.f2 == f2);
  CHECK(*v.ratio == doctest::Approx(7.0026).epsilon(2e-5));
  CHECK(std::abs(*v.f2 - 7 * f1) == doctest::Approx(4.2e-9).epsilon(0.01));
  CHECK(v.deviation_bins <= 2.0);
  // The 1.25-year line stays unassigned.
    CHECK(v.members[0].series == HarmonicSeries::unassigned);
  CHECK(v.members[1].series == HarmonicSeries::f1);
  CHECK(v.members[3].multiple == 3);
  // 7 f1 lies within tolerance, so the f1 series claims f2 first.
  CHECK(v.members[4].series == HarmonicSeries::f1);
  CHECK(v.members[4].multiple == 7);
}

TEST_CASE("harmonic_series_check: exact comb, incommensurate lines, scaling, splitting") {
  const double df = 1e-9;
  const double f1 = 1.0 / (7.0 * kDay);
  std::vector<double> freqs, amps;
  for (int k = 1; k <= 7; ++k) {
    freqs.push_back(k * f1);
    amps.push_back(k == 1 ? 10.0 : 1.0 + 0.1 * k);
  }
  const auto comb = harmonic_series_check(table_of(freqs, amps, df));
  CHECK(comb.count(HarmonicSeries::f1) == 7);
  REQUIRE(comb.ratio.has_value());
  CHECK(*comb.ratio == doctest::Approx(7.0).epsilon(1e-15));
  for (int k = 1; k <= 7; ++k) CHECK(comb.members[k - 1].multiple == k);

  const auto odd = harmonic_series_check(table_of({f1, 3.37 * f1}, {5.0, 4.0}, df));
  CHECK_FALSE(odd.f2.has_value());
  CHECK(odd.members[1].series == HarmonicSeries::unassigned);

  std::vector<double> scaled = amps;
  for (auto& a : scaled) a *= 1e6;
  const auto comb2 = harmonic_series_check(table_of(freqs, scaled, df));
  CHECK(comb2.f1 == comb.f1);
  CHECK(comb2.f2 == comb.f2);
  for (std::size_t i = 0; i < freqs.size(); ++i) CHECK(comb2.members[i].series == comb.members[i].series);

  // f2 series beyond 7 f1 and a two-line splitting pair at 23 f2 and 24 f2 (f2 series stops at 22).
  const double f2 = 7 * f1;
  SeriesOptions o;
  o.f2_max_multiple = 22;
  const auto split = harmonic_series_check(
      table_of({f1, f2, 9 * f2, 23 * f2, 23.5 * f2, 24 * f2}, {5, 4, 1, 1, 1, 1}, df), o);
  CHECK(split.members[2].series == HarmonicSeries::f2);
  CHECK(split.members[2].multiple == 9);
  CHECK(split.splitting_reported);
  CHECK(split.count(HarmonicSeries::splitting) == 3);
  const auto lone = harmonic_series_check(table_of({f1, f2, 23.5 * f2}, {5, 4, 1}, df), o);
  CHECK_FALSE(lone.splitting_reported);
  CHECK(lone.members[2].series == HarmonicSeries::unassigned);

  CHECK_THROWS_AS(harmonic_series_check(table_of({f1}, {1}, df)), InvalidArgument);
  CHECK_THROWS_AS(harmonic_series_check(table_of({1e-3, 2e-3}, {1, 1}, df)), DegenerateInput);
  CHECK(to_string(HarmonicSeries::splitting) == "splitting");
}

TEST_CASE("near_monthly_test: 30.34 d line is non-lunar, 29.53 d line is lunar, no line negative") {
  const double f_line = 1.0 / (30.34074 * kDay), f_lunar = 1.0 / (29.530589 * kDay);
  const auto with_line = hourly_lines({f_line}, 65536, 7);
  const double thr = 0.01 * *std::max_element(with_line.values.begin(), with_line.values.end());
  const auto v = near_monthly_test(with_line, thr);
  CHECK(v.detected);
  REQUIRE(v.lines.size() == 1);
  CHECK(v.lines[0].line.period.days() == doctest::Approx(30.34074).epsilon(0.002));
  CHECK(v.lines[0].lunar_separation_bins >= 2.0);
  CHECK_FALSE(v.lines[0].lunar_compatible);

  const auto lunar = near_monthly_test(hourly_lines({f_lunar}, 65536, 8), thr);
  REQUIRE(lunar.lines.size() == 1);
  CHECK(lunar.lines[0].lunar_compatible);

  const auto none = near_monthly_test(hourly_lines({f_line * 3.0}, 65536, 9), thr);
  CHECK_FALSE(none.detected);
  CHECK(none.lines.empty());
  CHECK(none.first_bin == 90);
  CHECK(none.last_bin == 92);

  CHECK_THROWS_AS(near_monthly_test(hourly_lines({1e-5}, 1024, 1), thr), InvalidArgument);
  SpectralEstimate fast = hourly_lines({1e-5}, 1024, 1);
  fast.grid = frequency_grid(1024, 60.0);
  CHECK_THROWS_AS(near_monthly_test(fast, thr), InvalidArgument);
}
