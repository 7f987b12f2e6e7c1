#include "ulfkit/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ulfkit/errors.hpp"
#include "ulfkit/stats.hpp"

namespace ulfkit {
namespace {

// Auto-spectrum bins below this fraction of the channel's peak carry no
// information (e.g. DC after mean removal).
constexpr double kAutoFloor = 1e-13;
// A conditioned auto-spectrum below this fraction of the unconditioned one
// means the conditioning set explains the channel entirely.
constexpr double kConditionedFloor = 1e-10;
constexpr double kRidge = 1e-10;

std::vector<double> auto_floors(const SpectralMatrix& s) {
  std::vector<double> floors(s.channels(), 0.0);
  for (std::size_t c = 0; c < s.channels(); ++c) {
    double peak = 0.0;
    for (std::size_t k = 0; k < s.bin_count(); ++k) peak = std::max(peak, s(k, c, c).real());
    floors[c] = kAutoFloor * peak;
  }
  return floors;
}

CoherenceFunction shell(const SpectralMatrix& s, CoherenceKind kind, std::string description) {
  CoherenceFunction out;
  out.grid = s.grid();
  out.kind = kind;
  out.description = std::move(description);
  out.n_averages = s.n_averages();
  out.axis.resize(s.bin_count());
  out.values.assign(s.bin_count(), std::nullopt);
  for (std::size_t k = 0; k < s.bin_count(); ++k) out.axis[k] = s.grid().frequency(k);
  return out;
}

void check_channel(const SpectralMatrix& s, std::size_t c, const char* who) {
  if (c >= s.channels()) {
    throw InvalidArgument(std::string(who) + ": channel index " + std::to_string(c) + " out of range");
  }
}

ComplexMatrix submatrix(const ComplexMatrix& m, std::span<const std::size_t> rows,
                        std::span<const std::size_t> cols) {
  ComplexMatrix out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  return out;
}

// Solves A X = B, retrying once with a ridge of kRidge * trace(A)/n on the
// diagonal. nullopt when still singular.
std::optional<ComplexMatrix> regularized_solve(const ComplexMatrix& a, const ComplexMatrix& b) {
  try {
    return gauss_solve_multi(a, b);
  } catch (const SingularMatrix&) {
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) trace += a(i, i).real();
  const double ridge = kRidge * trace / static_cast<double>(a.rows());
  if (!(ridge > 0.0)) return std::nullopt;
  ComplexMatrix reg = a;
  for (std::size_t i = 0; i < a.rows(); ++i) reg(i, i) += ridge;
  try {
    return gauss_solve_multi(reg, b);
  } catch (const SingularMatrix&) {
    return std::nullopt;
  }
}

// S_XX - S_XZ S_ZZ^-1 S_ZX at one bin.
std::optional<ComplexMatrix> conditioned_block(const ComplexMatrix& m, std::span<const std::size_t> x,
                                               std::span<const std::size_t> z) {
  auto sxx = submatrix(m, x, x);
  if (z.empty()) return sxx;
  const auto w = regularized_solve(submatrix(m, z, z), submatrix(m, z, x));
  if (!w) return std::nullopt;
  const auto sxz = submatrix(m, x, z);
  for (std::size_t r = 0; r < x.size(); ++r)
    for (std::size_t c = 0; c < x.size(); ++c) {
      cplx acc{};
      for (std::size_t q = 0; q < z.size(); ++q) acc += sxz(r, q) * (*w)(q, c);
      sxx(r, c) -= acc;
    }
  return sxx;
}

std::string join_indices(std::span<const std::size_t> idx, const SpectralMatrix& s) {
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ",";
    out += s.labels()[idx[i]];
  }
  return out;
}

}  // namespace

SpectralMatrix::SpectralMatrix(FrequencyGrid grid, std::vector<std::string> labels, std::size_t n_averages,
                               std::vector<ComplexMatrix> bins)
    : grid_(grid), labels_(std::move(labels)), n_averages_(n_averages), bins_(std::move(bins)) {
  for (const auto& b : bins_) {
    if (b.rows() != labels_.size() || b.cols() != labels_.size()) {
      throw InvalidArgument("SpectralMatrix: bin matrix does not match channel count");
    }
  }
}

std::size_t SpectralMatrix::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw InvalidArgument("SpectralMatrix: no channel labelled '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

SpectralMatrix spectral_matrix(std::span<const TimeSeries> channels, const PsdOptions& options,
                               bool for_coherence) {
  if (channels.size() < 2) throw InvalidArgument("spectral_matrix: need at least 2 channels");
  if (for_coherence && options.segments < 2) {
    throw InvalidArgument("spectral_matrix: coherence of one average is identically 1; use >= 2 segments");
  }
  const std::size_t m = channels.size();
  for (const auto& c : channels) {
    if (c.size() != channels.front().size() || std::abs(c.dt() - channels.front().dt()) > 1e-9 * c.dt()) {
      throw InvalidArgument("spectral_matrix: channels must share dt and length");
    }
  }
  std::vector<SegmentTransforms> st;
  st.reserve(m);
  for (const auto& c : channels) st.push_back(segment_transforms(c, options));

  const auto& grid = st.front().grid;
  const std::size_t n_seg = st.front().segments.size();
  const double inv = 1.0 / static_cast<double>(n_seg);
  std::vector<ComplexMatrix> bins(grid.bin_count(), ComplexMatrix(m, m));
  for (std::size_t k = 0; k < grid.bin_count(); ++k) {
    auto& b = bins[k];
    const double scale = st.front().bin_scale(k) * inv;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j) {
        cplx acc{};
        for (std::size_t s = 0; s < n_seg; ++s) acc += std::conj(st[i].segments[s][k]) * st[j].segments[s][k];
        acc *= scale;
        if (i == j) {
          b(i, i) = {acc.real(), 0.0};
        } else {
          b(i, j) = acc;
          b(j, i) = std::conj(acc);
        }
      }
    }
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < m; ++i) {
    labels.push_back(channels[i].label().empty() ? "ch" + std::to_string(i) : channels[i].label());
  }
  return SpectralMatrix(grid, std::move(labels), n_seg, std::move(bins));
}

SpectralMatrix spectral_matrix(const ProcessComplex& complex, const PsdOptions& options, bool for_coherence) {
  return spectral_matrix(std::span<const TimeSeries>(complex.channels()), options, for_coherence);
}

std::size_t CoherenceFunction::defined_count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); }));
}

std::optional<double> CoherenceFunction::band_mean(double f_lo, double f_hi) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (axis[k] < f_lo || axis[k] > f_hi || !values[k]) continue;
    sum += *values[k];
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

CoherenceFunction ordinary_coherence(const SpectralMatrix& s, std::size_t i, std::size_t j) {
  check_channel(s, i, "ordinary_coherence");
  check_channel(s, j, "ordinary_coherence");
  if (i == j) throw InvalidArgument("ordinary_coherence: channels must differ");
  auto out = shell(s, CoherenceKind::ordinary, s.labels()[i] + "~" + s.labels()[j]);
  const auto floors = auto_floors(s);
  for (std::size_t k = 0; k < s.bin_count(); ++k) {
    const double sii = s(k, i, i).real();
    const double sjj = s(k, j, j).real();
    if (sii <= floors[i] || sjj <= floors[j]) continue;
    out.values[k] = std::clamp(std::norm(s(k, i, j)) / (sii * sjj), 0.0, 1.0);
  }
  return out;
}

CoherenceFunction partial_coherence_eq6(const SpectralMatrix& s, std::size_t p, std::size_t n, std::size_t t) {
  for (auto c : {p, n, t}) check_channel(s, c, "partial_coherence_eq6");
  if (p == n || p == t || n == t) throw InvalidArgument("partial_coherence_eq6: channels must be distinct");
  auto out = shell(s, CoherenceKind::partial, s.labels()[p] + "~" + s.labels()[n] + "|" + s.labels()[t]);
  const auto floors = auto_floors(s);
  for (std::size_t k = 0; k < s.bin_count(); ++k) {
    const double gp = s(k, p, p).real();
    const double gn = s(k, n, n).real();
    const double gt = s(k, t, t).real();
    if (gp <= floors[p] || gn <= floors[n] || gt <= floors[t]) continue;
    const cplx gpn = s(k, p, n);
    const cplx gpt = s(k, p, t);
    const cplx gtn = s(k, t, n);
    const double bracket_p = 1.0 - std::norm(gpt) / (gp * gt);
    const double bracket_n = 1.0 - std::norm(s(k, n, t)) / (gn * gt);
    if (bracket_p <= kConditionedFloor || bracket_n <= kConditionedFloor) continue;
    double numerator = 0.0;
    if (gpn != cplx{}) {
      numerator = std::norm(gpn) * std::norm(1.0 - (gpt * gtn) / (gt * gpn));
    } else {
      numerator = std::norm(gpt * gtn / gt);
    }
    out.values[k] = std::clamp(numerator / (gp * bracket_p * gn * bracket_n), 0.0, 1.0);
  }
  return out;
}

CoherenceFunction partial_coherence(const SpectralMatrix& s, std::size_t i, std::size_t j,
                                    std::span<const std::size_t> z) {
  check_channel(s, i, "partial_coherence");
  check_channel(s, j, "partial_coherence");
  if (i == j) throw InvalidArgument("partial_coherence: channels must differ");
  for (auto c : z) {
    check_channel(s, c, "partial_coherence");
    if (c == i || c == j) throw InvalidArgument("partial_coherence: conditioning set contains i or j");
  }
  if (z.size() + 2 > s.channels()) throw InvalidArgument("partial_coherence: conditioning set too large");
  if (z.empty()) return ordinary_coherence(s, i, j);

  auto out = shell(s, CoherenceKind::partial, s.labels()[i] + "~" + s.labels()[j] + "|" + join_indices(z, s));
  const auto floors = auto_floors(s);
  const std::size_t x[2] = {i, j};
  for (std::size_t k = 0; k < s.bin_count(); ++k) {
    const double sii = s(k, i, i).real();
    const double sjj = s(k, j, j).real();
    if (sii <= floors[i] || sjj <= floors[j]) continue;
    const auto c = conditioned_block(s.at(k), x, z);
    if (!c) continue;
    const double cii = (*c)(0, 0).real();
    const double cjj = (*c)(1, 1).real();
    if (cii <= kConditionedFloor * sii || cjj <= kConditionedFloor * sjj) continue;
    out.values[k] = std::clamp(std::norm((*c)(0, 1)) / (cii * cjj), 0.0, 1.0);
  }
  return out;
}

CoherenceFunction multiple_coherence(const SpectralMatrix& s, std::size_t output,
                                     std::span<const std::size_t> inputs) {
  check_channel(s, output, "multiple_coherence");
  if (inputs.empty()) throw InvalidArgument("multiple_coherence: need at least one input");
  for (auto c : inputs) {
    check_channel(s, c, "multiple_coherence");
    if (c == output) throw InvalidArgument("multiple_coherence: output is in the input set");
  }
  auto out = shell(s, CoherenceKind::multiple, s.labels()[output] + ":" + join_indices(inputs, s));
  const auto floors = auto_floors(s);
  const std::size_t y[1] = {output};
  for (std::size_t k = 0; k < s.bin_count(); ++k) {
    const double syy = s(k, output, output).real();
    if (syy <= floors[output]) continue;
    bool dead_input = false;
    for (auto c : inputs) dead_input |= s(k, c, c).real() <= floors[c];
    if (dead_input) continue;
    const auto c = conditioned_block(s.at(k), y, inputs);
    if (!c) continue;
    out.values[k] = std::clamp(1.0 - (*c)(0, 0).real() / syy, 0.0, 1.0);
  }
  return out;
}

GainPhase gain_phase(const SpectralMatrix& s, std::size_t i, std::size_t j) {
  check_channel(s, i, "gain_phase");
  check_channel(s, j, "gain_phase");
  if (i == j) throw InvalidArgument("gain_phase: channels must differ");
  GainPhase out;
  out.grid = s.grid();
  out.axis.resize(s.bin_count());
  out.gain.assign(s.bin_count(), std::nullopt);
  out.phase.assign(s.bin_count(), std::nullopt);
  const auto floors = auto_floors(s);
  for (std::size_t k = 0; k < s.bin_count(); ++k) {
    out.axis[k] = s.grid().frequency(k);
    const double sii = s(k, i, i).real();
    if (sii <= floors[i]) continue;
    const cplx sij = s(k, i, j);
    out.gain[k] = std::abs(sij) / sii;
    double ph = std::arg(sij);
    if (ph <= -std::numbers::pi) ph = std::numbers::pi;
    out.phase[k] = ph;
  }
  return out;
}

double CorrelationFunction::at_lag(long lag) const {
  const long max_lag = lags.empty() ? 0 : lags.back();
  if (lag < -max_lag || lag > max_lag) throw InvalidArgument("correlation: lag out of range");
  return values[static_cast<std::size_t>(lag + max_lag)];
}

long CorrelationFunction::argmax() const {
  const auto it = std::max_element(values.begin(), values.end());
  return lags[static_cast<std::size_t>(it - values.begin())];
}

CorrelationFunction correlation(const TimeSeries& x, const TimeSeries& y, std::size_t max_lag) {
  if (x.size() != y.size()) throw InvalidArgument("correlation: series differ in length");
  if (max_lag >= x.size()) throw InvalidArgument("correlation: max_lag must be shorter than the series");
  const std::size_t n = x.size();
  const double mx = mean(x.values());
  const double my = mean(y.values());
  std::vector<double> xc(n), yc(n);
  for (std::size_t t = 0; t < n; ++t) {
    xc[t] = x[t] - mx;
    yc[t] = y[t] - my;
  }
  CorrelationFunction out;
  out.dt = x.dt();
  const long ml = static_cast<long>(max_lag);
  for (long l = -ml; l <= ml; ++l) {
    const std::size_t a = static_cast<std::size_t>(std::abs(l));
    double acc = 0.0;
    for (std::size_t t = 0; t + a < n; ++t) acc += l >= 0 ? xc[t] * yc[t + a] : xc[t + a] * yc[t];
    out.lags.push_back(l);
    out.values.push_back(acc / static_cast<double>(n));
  }
  return out;
}

CorrelationFunction correlation(const TimeSeries& x, std::size_t max_lag) { return correlation(x, x, max_lag); }

}  // namespace ulfkit
