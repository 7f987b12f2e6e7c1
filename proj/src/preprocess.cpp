#include "ulfkit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/fisher_f.hpp>

#include "ulfkit/errors.hpp"
#include "ulfkit/linalg.hpp"
#include "ulfkit/stats.hpp"

namespace ulfkit {
namespace {

double scaled_position(std::size_t i, std::size_t n) {
  return n < 2 ? 0.0 : 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
}

double evaluate_scaled_trend(const std::vector<double>& coeffs, std::size_t i, std::size_t n) {
  const double u = scaled_position(i, n);
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * u + coeffs[k];
  return acc;
}

std::vector<double> fit_scaled_polynomial(std::span<const double> y, int degree) {
  const std::size_t n = y.size();
  const auto p = static_cast<std::size_t>(degree + 1);
  RealMatrix gram(p, p);
  std::vector<double> moments(2 * p - 1, 0.0);
  std::vector<double> rhs(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = scaled_position(i, n);
    double v = 1.0;
    for (std::size_t k = 0; k < 2 * p - 1; ++k) {
      moments[k] += v;
      if (k < p) rhs[k] += v * y[i];
      v *= u;
    }
  }
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t c = 0; c < p; ++c) gram(r, c) = moments[r + c];
  return gauss_solve(gram, rhs);
}

// Convert coefficients in u = a*t + b to coefficients in t.
std::vector<double> unscale_coefficients(const std::vector<double>& scaled, double a, double b) {
  const std::size_t p = scaled.size();
  std::vector<double> out(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    double binom = 1.0;  // C(k, j)
    for (std::size_t j = 0; j <= k; ++j) {
      out[j] += scaled[k] * binom * std::pow(a, static_cast<double>(j)) *
                std::pow(b, static_cast<double>(k - j));
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
  }
  return out;
}

std::vector<double> subtract_scaled_trend(std::span<const double> x,
                                          const std::vector<double>& coeffs) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - evaluate_scaled_trend(coeffs, i, x.size());
  return out;
}

std::vector<double> standardize_values(std::span<const double> x, double m, double s) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m) / s;
  return out;
}

std::vector<double> apply_window(std::span<const double> x, const std::vector<double>& w) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * w[i];
  return out;
}

}  // namespace

std::pair<TimeSeries, PreprocessReport> center_normalize(const TimeSeries& series) {
  const double m = mean(series.values());
  const double s = stddev(series.values());
  if (!(s > 0.0)) throw DegenerateInput("center_normalize: series '" + series.label() + "' is constant");
  PreprocessReport report;
  report.original_mean = m;
  report.original_std = s;
  report.steps.push_back("center_normalize");
  return {series.with_values(standardize_values(series.values(), m, s)), std::move(report)};
}

DetrendResult detrend(const TimeSeries& series, int degree) {
  if (degree < 0 || degree > 5) throw InvalidArgument("detrend: degree must be in 0..5");
  const std::size_t n = series.size();
  if (static_cast<std::size_t>(degree) + 1 >= n) {
    throw InvalidArgument("detrend: degree " + std::to_string(degree) + " needs more than " +
                          std::to_string(degree + 1) + " samples");
  }
  auto coeffs = fit_scaled_polynomial(series.values(), degree);
  auto residual = subtract_scaled_trend(series.values(), coeffs);
  // One refinement pass picks up what the normal equations lost to rounding.
  const auto correction = fit_scaled_polynomial(residual, degree);
  for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] += correction[k];
  residual = subtract_scaled_trend(series.values(), coeffs);

  const double a = n < 2 ? 0.0 : 2.0 / (static_cast<double>(n - 1) * series.dt());
  DetrendResult out{series.with_values(std::move(residual)), unscale_coefficients(coeffs, a, -1.0),
                    coeffs};
  return out;
}

std::vector<double> cosine_taper_window(std::size_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("cosine_taper: taper fraction must be in [0, 1]");
  std::vector<double> w(n, 1.0);
  if (p == 0.0 || n < 2) return w;
  const double half = p / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    if (x < half) {
      w[i] = 0.5 * (1.0 - std::cos(std::numbers::pi * x / half));
    } else if (x > 1.0 - half) {
      w[i] = 0.5 * (1.0 - std::cos(std::numbers::pi * (1.0 - x) / half));
    }
  }
  return w;
}

std::pair<TimeSeries, double> cosine_taper(const TimeSeries& series, double p) {
  const auto w = cosine_taper_window(series.size(), p);
  double u = 0.0;
  for (double v : w) u += v * v;
  u /= static_cast<double>(w.size());
  return {series.with_values(apply_window(series.values(), w)), u};
}

TimeSeries zero_pad(const TimeSeries& series, std::size_t n_fft) {
  if (!is_power_of_two(n_fft)) throw InvalidArgument("zero_pad: n_fft must be a power of two");
  if (n_fft < series.size()) {
    throw InvalidArgument("zero_pad: n_fft " + std::to_string(n_fft) + " is shorter than the series (" +
                          std::to_string(series.size()) + ")");
  }
  std::vector<double> out(series.data());
  out.resize(n_fft, 0.0);
  return series.with_values(std::move(out));
}

TimeSeries fir_filter(const TimeSeries& series, std::span<const double> taps) {
  if (taps.empty()) throw InvalidArgument("fir_filter: taps must be non-empty");
  const auto x = series.values();
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = 0.0;
    const std::size_t kmax = std::min(taps.size(), i + 1);
    for (std::size_t k = 0; k < kmax; ++k) acc += taps[k] * x[i - k];
    y[i] = acc;
  }
  return series.with_values(std::move(y));
}

Conditioned condition(const TimeSeries& raw, const ConditionOptions& options) {
  PreprocessReport report;
  TimeSeries current = raw;
  if (options.detrend_degree >= 0) {
    auto d = detrend(current, options.detrend_degree);
    report.detrend_degree = options.detrend_degree;
    report.removed_trend = std::move(d.coefficients);
    report.trend_scaled = std::move(d.scaled_coefficients);
    report.steps.push_back("detrend");
    current = std::move(d.residual);
  }
  if (options.normalize) {
    auto [normalized, r] = center_normalize(current);
    report.original_mean = r.original_mean;
    report.original_std = r.original_std;
    report.steps.push_back("center_normalize");
    current = std::move(normalized);
  }
  if (options.taper_fraction > 0.0) {
    auto [tapered, u] = cosine_taper(current, options.taper_fraction);
    report.taper_fraction = options.taper_fraction;
    report.taper_power_correction = u;
    report.steps.push_back("cosine_taper");
    current = std::move(tapered);
  }
  return {std::move(current), std::move(report)};
}

TimeSeries replay(const TimeSeries& raw, const PreprocessReport& report) {
  std::vector<double> x(raw.data());
  for (const auto& step : report.steps) {
    if (step == "detrend") {
      x = subtract_scaled_trend(x, report.trend_scaled);
    } else if (step == "center_normalize") {
      x = standardize_values(x, report.original_mean, report.original_std);
    } else if (step == "cosine_taper") {
      x = apply_window(x, cosine_taper_window(x.size(), report.taper_fraction));
    } else {
      throw InvalidArgument("replay: unknown step '" + step + "'");
    }
  }
  return raw.with_values(std::move(x));
}

long long reverse_arrangements(std::span<const double> x) {
  long long count = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if (x[i] > x[j]) ++count;
  return count;
}

StationarityVerdict stationarity_test(const TimeSeries& series, std::size_t n_segments,
                                      StationarityQuantity quantity, double alpha) {
  if (n_segments < 8) throw InvalidArgument("stationarity_test: need at least 8 segments");
  if (series.size() < 4 * n_segments) {
    throw InvalidArgument("stationarity_test: series needs at least 4 samples per segment");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("stationarity_test: alpha must be in (0, 1)");
  if (!(variance(series.values()) > 0.0)) {
    throw DegenerateInput("stationarity_test: series '" + series.label() + "' is constant");
  }

  const std::size_t block = series.size() / n_segments;
  std::vector<double> stats(n_segments);
  for (std::size_t s = 0; s < n_segments; ++s) {
    const auto part = series.values().subspan(s * block, block);
    stats[s] = quantity == StationarityQuantity::mean ? mean(part) : variance(part);
  }

  StationarityVerdict v;
  v.n_segments = n_segments;
  v.quantity = quantity;
  v.alpha = alpha;
  v.reverse_arrangements = reverse_arrangements(stats);
  const double n = static_cast<double>(n_segments);
  const double mu = n * (n - 1.0) / 4.0;
  const double sigma = std::sqrt(n * (2.0 * n + 5.0) * (n - 1.0) / 72.0);
  v.statistic = (static_cast<double>(v.reverse_arrangements) - mu) / sigma;
  v.p_value = std::clamp(normal_two_sided_p(v.statistic), 0.0, 1.0);
  v.pass = v.p_value >= alpha;
  return v;
}

ErgodicityVerdict ergodicity_check(std::span<const TimeSeries> ensemble, double alpha) {
  if (ensemble.size() < 2) throw InvalidArgument("ergodicity_check: need at least 2 members");
  const std::size_t n = ensemble.front().size();
  for (const auto& m : ensemble) {
    if (m.size() != n) throw InvalidArgument("ergodicity_check: members differ in length");
  }
  if (n < 2) throw InvalidArgument("ergodicity_check: members need at least 2 samples");

  const std::size_t k = ensemble.size();
  std::vector<double> means(k);
  double ss_within = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    means[i] = mean(ensemble[i].values());
    for (double x : ensemble[i].values()) ss_within += (x - means[i]) * (x - means[i]);
  }
  const double grand = mean(means);
  double ss_between = 0.0;
  for (double m : means) ss_between += static_cast<double>(n) * (m - grand) * (m - grand);

  ErgodicityVerdict v;
  v.alpha = alpha;
  v.df_between = k - 1;
  v.df_within = k * (n - 1);
  const double ms_between = ss_between / static_cast<double>(v.df_between);
  const double ms_within = ss_within / static_cast<double>(v.df_within);
  if (ms_within > 0.0) {
    v.statistic = ms_between / ms_within;
    const boost::math::fisher_f dist(static_cast<double>(v.df_between),
                                     static_cast<double>(v.df_within));
    v.p_value = boost::math::cdf(boost::math::complement(dist, v.statistic));
  } else {
    // Every member is constant: identical members agree, distinct ones do not.
    v.statistic = ms_between > 0.0 ? HUGE_VAL : 0.0;
    v.p_value = ms_between > 0.0 ? 0.0 : 1.0;
  }
  v.p_value = std::clamp(v.p_value, 0.0, 1.0);
  v.pass = v.p_value >= alpha;
  return v;
}

}  // namespace ulfkit
