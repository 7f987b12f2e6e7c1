#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulfkit/linalg.hpp"
#include "ulfkit/signal_model.hpp"
#include "ulfkit/spectral.hpp"

namespace ulfkit {

// Per-bin Hermitian matrix of auto and cross spectra, S_ij = G_{ij}
// (conj(X_i) X_j convention).
class SpectralMatrix {
 public:
  SpectralMatrix(FrequencyGrid grid, std::vector<std::string> labels, std::size_t n_averages,
                 std::vector<ComplexMatrix> bins);

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t channels() const { return labels_.size(); }
  std::size_t bin_count() const { return bins_.size(); }
  std::size_t n_averages() const { return n_averages_; }
  const ComplexMatrix& at(std::size_t bin) const { return bins_[bin]; }
  cplx operator()(std::size_t bin, std::size_t i, std::size_t j) const { return bins_[bin](i, j); }
  std::size_t index_of(const std::string& label) const;

 private:
  FrequencyGrid grid_;
  std::vector<std::string> labels_;
  std::size_t n_averages_;
  std::vector<ComplexMatrix> bins_;
};

// `for_coherence` rejects single-segment estimates: coherence of one average
// is identically 1.
SpectralMatrix spectral_matrix(std::span<const TimeSeries> channels, const PsdOptions& options,
                               bool for_coherence = true);
SpectralMatrix spectral_matrix(const ProcessComplex& complex, const PsdOptions& options,
                               bool for_coherence = true);

enum class CoherenceKind { ordinary, partial, multiple };

struct CoherenceFunction {
  FrequencyGrid grid;
  std::vector<double> axis;
  // Missing bins are undefined (zero auto-spectrum, singular conditioning);
  // they are never reported as 0 or 1.
  std::vector<std::optional<double>> values;
  CoherenceKind kind = CoherenceKind::ordinary;
  std::string description;
  std::size_t n_averages = 0;

  std::size_t defined_count() const;
  // Mean over defined bins in [f_lo, f_hi]; nullopt when none are defined.
  std::optional<double> band_mean(double f_lo, double f_hi) const;
};

CoherenceFunction ordinary_coherence(const SpectralMatrix& s, std::size_t i, std::size_t j);

// Partial coherence of p and n with t removed, written out term by term.
CoherenceFunction partial_coherence_eq6(const SpectralMatrix& s, std::size_t p, std::size_t n,
                                        std::size_t t);

// Partial coherence of i and j conditioned on Z via the Schur complement
// S_XX - S_XZ S_ZZ^-1 S_ZX.
CoherenceFunction partial_coherence(const SpectralMatrix& s, std::size_t i, std::size_t j,
                                    std::span<const std::size_t> conditioning);

// Fraction of channel j's spectrum explained jointly by the inputs.
CoherenceFunction multiple_coherence(const SpectralMatrix& s, std::size_t output,
                                     std::span<const std::size_t> inputs);

struct GainPhase {
  FrequencyGrid grid;
  std::vector<double> axis;
  std::vector<std::optional<double>> gain;
  std::vector<std::optional<double>> phase;  // (-pi, pi]
};

// H = S_ij / S_ii with i the input and j the output.
GainPhase gain_phase(const SpectralMatrix& s, std::size_t i, std::size_t j);

struct CorrelationFunction {
  std::vector<long> lags;
  std::vector<double> values;
  double dt = 1.0;

  double at_lag(long lag) const;
  long argmax() const;
};

// Biased estimator R_xy(l) = (1/N) sum_t x_t y_{t+l} on centered inputs,
// lags -max_lag..max_lag.
CorrelationFunction correlation(const TimeSeries& x, const TimeSeries& y, std::size_t max_lag);
CorrelationFunction correlation(const TimeSeries& x, std::size_t max_lag);

}  // namespace ulfkit
