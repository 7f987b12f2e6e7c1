#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ulfkit/signal_model.hpp"

namespace ulfkit {

using cplx = std::complex<double>;

enum class FftDirection { forward, inverse };

// Radix-2 transform. Forward is unnormalized; inverse scales by 1/N.
void fft_inplace(std::span<cplx> data, FftDirection direction);
std::vector<cplx> fft(std::vector<cplx> data, FftDirection direction = FftDirection::forward);

// Forward DFT of any length (chirp-z on top of the radix-2 kernel).
std::vector<cplx> dft_any_length(const std::vector<cplx>& data);

// Unnormalized Walsh-Hadamard transform in natural (Hadamard) order.
void fwht_inplace(std::span<double> data);
std::vector<double> fwht(std::vector<double> data);
// Reorders a natural-ordered Walsh spectrum by sequency (number of sign changes).
std::vector<double> hadamard_to_sequency(const std::vector<double>& natural);

struct PsdOptions {
  std::size_t n_fft = 0;  // 0: next power of two >= segment length
  std::size_t segments = 1;
  double overlap = 0.0;   // fraction of segment length shared by neighbours, [0, 1)
  double taper_fraction = 0.1;
  int detrend_degree = 0;  // per segment; -1 leaves segments untouched
  bool normalize = false;  // standardize the whole series first
  bool allow_padding = true;
};

// Per-segment one-sided Fourier coefficients (bins 0..n_fft/2) under one
// segmentation and taper. PSD and cross-spectra are averages of products of
// these, so every estimator built on the same options shares its layout.
struct SegmentTransforms {
  FrequencyGrid grid;
  std::vector<std::vector<cplx>> segments;
  std::size_t segment_length = 0;
  double window_correction = 1.0;
  // 2 * dt / (segment_length * U); halved at DC and Nyquist.
  double density_scale = 0.0;

  double bin_scale(std::size_t k) const {
    return (k == 0 || k == grid.n_bins) ? 0.5 * density_scale : density_scale;
  }
};

SegmentTransforms segment_transforms(const TimeSeries& series, const PsdOptions& options);

enum class SpectrumKind { auto_spectrum, cross_spectrum, cepstrum };

struct SpectralEstimate {
  FrequencyGrid grid;
  std::vector<double> axis;    // Hz, or seconds for cepstra
  std::vector<double> values;  // auto spectrum / cepstrum; |G_xy| for cross spectra
  std::vector<cplx> cross;     // cross spectra only
  SpectrumKind kind = SpectrumKind::auto_spectrum;
  std::size_t n_averages = 1;
  std::size_t segment_length = 0;
  double window_correction = 1.0;
  std::string label;

  std::size_t size() const { return axis.size(); }
  // Sum of values * df.
  double integrated() const;
  std::vector<double> co() const;
  std::vector<double> quad() const;
};

// One-sided density G(f_k) = 2 |X_k|^2 dt / (L U), DC and Nyquist not doubled,
// averaged over segments.
SpectralEstimate psd(const TimeSeries& series, const PsdOptions& options = {});

// G_xy(f_k) = 2 conj(X_k) Y_k dt / (L U). co = Re, quad = -Im.
SpectralEstimate cross_psd(const TimeSeries& x, const TimeSeries& y, const PsdOptions& options = {});

// Daniell boxcar over `span` bins, truncated at the edges.
SpectralEstimate smooth_frequency(const SpectralEstimate& estimate, std::size_t span);

struct BispectrumPoint {
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  double f1 = 0.0;
  double f2 = 0.0;
  cplx value;
  double bicoherence = 0.0;
};

// Principal triangle k1 >= k2 >= 0, k1 + k2 <= n_fft/2.
struct Bispectrum {
  FrequencyGrid grid;
  std::size_t n_segments = 0;
  std::vector<BispectrumPoint> points;

  // Any (k1, k2) with k1 + k2 <= n_bins, folded onto the stored triangle.
  const BispectrumPoint& at(std::size_t k1, std::size_t k2) const;
  double mean_bicoherence() const;
};

Bispectrum bispectrum(const TimeSeries& series, std::size_t n_fft, std::size_t n_segments);

// Real cepstrum: inverse FFT of the log PSD, floored at max(PSD) * 1e-12.
SpectralEstimate cepstrum(const TimeSeries& series, std::size_t n_fft, double taper_fraction = 0.0);

}  // namespace ulfkit
