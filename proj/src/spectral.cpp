#include "ulfkit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ulfkit/errors.hpp"
#include "ulfkit/preprocess.hpp"

namespace ulfkit {
namespace {

// Twiddles exp(-2 pi i k / n) for k < n/2, cached per thread for the last size.
const std::vector<cplx>& twiddles(std::size_t n) {
  thread_local std::vector<cplx> table;
  thread_local std::size_t table_n = 0;
  if (table_n != n) {
    table.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      table[k] = {std::cos(angle), std::sin(angle)};
    }
#ifdef ULFKIT_FAULT_INJECT_TWIDDLE
    if (table.size() > 1) table[1] *= 1.001;
#endif
    table_n = n;
  }
  return table;
}

void require_power_of_two(std::size_t n, const char* who) {
  if (!is_power_of_two(n)) {
    throw InvalidArgument(std::string(who) + ": length must be a power of two, got " + std::to_string(n));
  }
}

}  // namespace

void fft_inplace(std::span<cplx> a, FftDirection direction) {
  const std::size_t n = a.size();
  require_power_of_two(n, "fft");
  if (n == 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const auto& w = twiddles(n);
  const bool inverse = direction == FftDirection::inverse;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx tw = inverse ? std::conj(w[k * stride]) : w[k * stride];
        const cplx u = a[start + k];
        const cplx v = a[start + k + half] * tw;
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double s = 1.0 / static_cast<double>(n);
    for (auto& v : a) v *= s;
  }
}

std::vector<cplx> fft(std::vector<cplx> data, FftDirection direction) {
  fft_inplace(data, direction);
  return data;
}

std::vector<cplx> dft_any_length(const std::vector<cplx>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (is_power_of_two(n)) return fft(x);

  std::vector<cplx> chirp(n);
  const std::size_t two_n = 2 * n;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k2 = (k * k) % two_n;
    const double angle = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = {std::cos(angle), std::sin(angle)};
  }
  const std::size_t m = next_power_of_two(2 * n - 1);
  std::vector<cplx> a(m), b(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  fft_inplace(a, FftDirection::forward);
  fft_inplace(b, FftDirection::forward);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_inplace(a, FftDirection::inverse);
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  return out;
}

void fwht_inplace(std::span<double> a) {
  const std::size_t n = a.size();
  require_power_of_two(n, "fwht");
  for (std::size_t len = 1; len < n; len <<= 1) {
    for (std::size_t start = 0; start < n; start += 2 * len) {
      for (std::size_t k = start; k < start + len; ++k) {
        const double u = a[k];
        const double v = a[k + len];
        a[k] = u + v;
        a[k + len] = u - v;
      }
    }
  }
}

std::vector<double> fwht(std::vector<double> data) {
  fwht_inplace(data);
  return data;
}

std::vector<double> hadamard_to_sequency(const std::vector<double>& natural) {
  const std::size_t n = natural.size();
  require_power_of_two(n, "hadamard_to_sequency");
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  std::vector<double> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t gray = s ^ (s >> 1);
    std::size_t rev = 0;
    for (std::size_t b = 0; b < bits; ++b)
      if (gray & (std::size_t{1} << b)) rev |= std::size_t{1} << (bits - 1 - b);
    out[s] = natural[rev];
  }
  return out;
}

SegmentTransforms segment_transforms(const TimeSeries& series, const PsdOptions& opt) {
  if (opt.segments == 0) throw InvalidArgument("psd: segments must be >= 1");
  if (!(opt.overlap >= 0.0 && opt.overlap < 1.0)) throw InvalidArgument("psd: overlap must be in [0, 1)");

  const TimeSeries base = opt.normalize ? center_normalize(series).first : series;
  const std::size_t len = base.size();
  const double span = 1.0 + static_cast<double>(opt.segments - 1) * (1.0 - opt.overlap);
  const auto seg_len = static_cast<std::size_t>(std::floor(static_cast<double>(len) / span + 1e-9));
  if (seg_len < 2) throw InvalidArgument("psd: series too short for the requested segmentation");
  const std::size_t step =
      opt.segments == 1
          ? seg_len
          : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                         static_cast<double>(seg_len) * (1.0 - opt.overlap) + 1e-9)));

  const std::size_t n_fft = opt.n_fft ? opt.n_fft : next_power_of_two(seg_len);
  if (!is_power_of_two(n_fft) || n_fft < 4) {
    throw InvalidArgument("psd: n_fft must be a power of two >= 4, got " + std::to_string(n_fft));
  }
  if (n_fft < seg_len) {
    throw InvalidArgument("psd: n_fft " + std::to_string(n_fft) + " is shorter than the segment length " +
                          std::to_string(seg_len));
  }
  if (n_fft > seg_len && !opt.allow_padding) {
    throw InvalidArgument("psd: segment length " + std::to_string(seg_len) + " is shorter than n_fft " +
                          std::to_string(n_fft) + " and padding is disabled");
  }

  SegmentTransforms out;
  out.grid = frequency_grid(n_fft, base.dt());
  out.segment_length = seg_len;
  const auto window = cosine_taper_window(seg_len, opt.taper_fraction);
  double u = 0.0;
  for (double w : window) u += w * w;
  out.window_correction = u / static_cast<double>(seg_len);
  out.density_scale = 2.0 * base.dt() / (static_cast<double>(seg_len) * out.window_correction);

  out.segments.reserve(opt.segments);
  std::vector<cplx> buf(n_fft);
  for (std::size_t s = 0; s < opt.segments; ++s) {
    TimeSeries seg = base.slice(s * step, seg_len);
    if (opt.detrend_degree >= 0) seg = detrend(seg, opt.detrend_degree).residual;
    std::fill(buf.begin(), buf.end(), cplx{});
    for (std::size_t i = 0; i < seg_len; ++i) buf[i] = seg[i] * window[i];
    fft_inplace(buf, FftDirection::forward);
    out.segments.emplace_back(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(out.grid.n_bins + 1));
  }
  return out;
}

double SpectralEstimate::integrated() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.df;
}

std::vector<double> SpectralEstimate::co() const {
  std::vector<double> out(cross.size());
  for (std::size_t k = 0; k < cross.size(); ++k) out[k] = cross[k].real();
  return out;
}

std::vector<double> SpectralEstimate::quad() const {
  std::vector<double> out(cross.size());
  for (std::size_t k = 0; k < cross.size(); ++k) out[k] = -cross[k].imag();
  return out;
}

namespace {

SpectralEstimate estimate_shell(const SegmentTransforms& st, SpectrumKind kind, std::string label) {
  SpectralEstimate e;
  e.grid = st.grid;
  e.kind = kind;
  e.n_averages = st.segments.size();
  e.segment_length = st.segment_length;
  e.window_correction = st.window_correction;
  e.label = std::move(label);
  e.axis.resize(st.grid.bin_count());
  for (std::size_t k = 0; k < e.axis.size(); ++k) e.axis[k] = st.grid.frequency(k);
  return e;
}

}  // namespace

SpectralEstimate psd(const TimeSeries& series, const PsdOptions& options) {
  const auto st = segment_transforms(series, options);
  auto e = estimate_shell(st, SpectrumKind::auto_spectrum, series.label());
  e.values.assign(st.grid.bin_count(), 0.0);
  for (const auto& seg : st.segments)
    for (std::size_t k = 0; k < e.values.size(); ++k) e.values[k] += std::norm(seg[k]);
  const double inv = 1.0 / static_cast<double>(st.segments.size());
  for (std::size_t k = 0; k < e.values.size(); ++k) e.values[k] *= st.bin_scale(k) * inv;
  return e;
}

SpectralEstimate cross_psd(const TimeSeries& x, const TimeSeries& y, const PsdOptions& options) {
  if (std::abs(x.dt() - y.dt()) > 1e-9 * x.dt()) throw InvalidArgument("cross_psd: series differ in dt");
  if (x.size() != y.size()) throw InvalidArgument("cross_psd: series differ in length");
  const auto sx = segment_transforms(x, options);
  const auto sy = segment_transforms(y, options);
  auto e = estimate_shell(sx, SpectrumKind::cross_spectrum, x.label() + "*" + y.label());
  e.cross.assign(sx.grid.bin_count(), cplx{});
  for (std::size_t s = 0; s < sx.segments.size(); ++s)
    for (std::size_t k = 0; k < e.cross.size(); ++k) e.cross[k] += std::conj(sx.segments[s][k]) * sy.segments[s][k];
  const double inv = 1.0 / static_cast<double>(sx.segments.size());
  e.values.resize(e.cross.size());
  for (std::size_t k = 0; k < e.cross.size(); ++k) {
    e.cross[k] *= sx.bin_scale(k) * inv;
    e.values[k] = std::abs(e.cross[k]);
  }
  return e;
}

namespace {

template <typename T>
std::vector<T> boxcar(const std::vector<T>& v, std::size_t span) {
  const std::size_t half = span / 2;
  std::vector<T> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::size_t lo = k >= half ? k - half : 0;
    const std::size_t hi = std::min(v.size() - 1, k + half);
    T acc{};
    for (std::size_t j = lo; j <= hi; ++j) acc += v[j];
    out[k] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace

SpectralEstimate smooth_frequency(const SpectralEstimate& estimate, std::size_t span) {
  if (span == 0 || span % 2 == 0) throw InvalidArgument("smooth_frequency: span must be odd and >= 1");
  if (span == 1) return estimate;
  SpectralEstimate out = estimate;
  if (!estimate.cross.empty()) {
    out.cross = boxcar(estimate.cross, span);
    for (std::size_t k = 0; k < out.cross.size(); ++k) out.values[k] = std::abs(out.cross[k]);
  } else {
    out.values = boxcar(estimate.values, span);
  }
  out.n_averages *= span;
  return out;
}

const BispectrumPoint& Bispectrum::at(std::size_t k1, std::size_t k2) const {
  if (k1 < k2) std::swap(k1, k2);
  if (k1 + k2 > grid.n_bins) throw InvalidArgument("Bispectrum::at: f1 + f2 beyond fmax");
  // Rows of the triangle are stored by k2, each holding k1 = k2..n_bins-k2.
  std::size_t offset = 0;
  for (std::size_t j = 0; j < k2; ++j) offset += grid.n_bins - 2 * j + 1;
  return points.at(offset + (k1 - k2));
}

double Bispectrum::mean_bicoherence() const {
  if (points.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : points) s += p.bicoherence;
  return s / static_cast<double>(points.size());
}

Bispectrum bispectrum(const TimeSeries& series, std::size_t n_fft, std::size_t n_segments) {
  require_power_of_two(n_fft, "bispectrum");
  if (n_fft < 4) throw InvalidArgument("bispectrum: n_fft must be >= 4");
  if (n_segments == 0) throw InvalidArgument("bispectrum: n_segments must be >= 1");
  if (series.size() < n_fft * n_segments) {
    throw InvalidArgument("bispectrum: need " + std::to_string(n_fft * n_segments) + " samples, have " +
                          std::to_string(series.size()));
  }
  PsdOptions opt;
  opt.n_fft = n_fft;
  opt.segments = n_segments;
  opt.taper_fraction = 0.0;
  opt.detrend_degree = 0;
  const auto st = segment_transforms(series.slice(0, n_fft * n_segments), opt);

  Bispectrum out;
  out.grid = st.grid;
  out.n_segments = n_segments;
  const std::size_t nb = st.grid.n_bins;
  const double inv = 1.0 / static_cast<double>(n_segments);
  for (std::size_t k2 = 0; 2 * k2 <= nb; ++k2) {
    for (std::size_t k1 = k2; k1 + k2 <= nb; ++k1) {
      cplx b{};
      double pair_power = 0.0;
      double sum_power = 0.0;
      for (const auto& x : st.segments) {
        const cplx pair = x[k1] * x[k2];
        b += pair * std::conj(x[k1 + k2]);
        pair_power += std::norm(pair);
        sum_power += std::norm(x[k1 + k2]);
      }
      b *= inv;
      pair_power *= inv;
      sum_power *= inv;
      const double denom = pair_power * sum_power;
      double b2 = denom > 0.0 ? std::norm(b) / denom : 0.0;
      b2 = std::clamp(b2, 0.0, 1.0);
      out.points.push_back({k1, k2, st.grid.frequency(k1), st.grid.frequency(k2), b, b2});
    }
  }
  return out;
}

SpectralEstimate cepstrum(const TimeSeries& series, std::size_t n_fft, double taper_fraction) {
  PsdOptions opt;
  opt.n_fft = n_fft;
  opt.taper_fraction = taper_fraction;
  opt.detrend_degree = 0;
  const auto spectrum = psd(series, opt);
  const double peak = *std::max_element(spectrum.values.begin(), spectrum.values.end());
  if (!(peak > 0.0)) throw DegenerateInput("cepstrum: spectrum of '" + series.label() + "' is identically zero");
  const double floor = peak * 1e-12;

  const std::size_t n = spectrum.grid.n_fft;
  const std::size_t nb = spectrum.grid.n_bins;
  std::vector<cplx> logspec(n);
  for (std::size_t k = 0; k <= nb; ++k) {
    const double v = std::log(std::max(spectrum.values[k], floor));
    logspec[k] = v;
    if (k > 0 && k < nb) logspec[n - k] = v;
  }
  fft_inplace(logspec, FftDirection::inverse);

  SpectralEstimate out;
  out.grid = spectrum.grid;
  out.kind = SpectrumKind::cepstrum;
  out.segment_length = spectrum.segment_length;
  out.window_correction = spectrum.window_correction;
  out.label = series.label();
  out.axis.resize(nb + 1);
  out.values.resize(nb + 1);
  for (std::size_t q = 0; q <= nb; ++q) {
    out.axis[q] = static_cast<double>(q) * series.dt();
    out.values[q] = logspec[q].real();
  }
  return out;
}

}  // namespace ulfkit
