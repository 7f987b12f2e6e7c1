#include "ulfkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ulfkit/errors.hpp"
#include "ulfkit/stats.hpp"

namespace ulfkit {

double FeatureVector::get(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InvalidArgument("FeatureVector: no feature '" + name + "'");
  return values[static_cast<std::size_t>(it - names.begin())];
}

FeatureVector FeatureVector::append(const FeatureVector& other) const {
  FeatureVector out = *this;
  for (std::size_t i = 0; i < other.size(); ++i) {
    if (std::find(names.begin(), names.end(), other.names[i]) != names.end()) {
      throw InvalidArgument("FeatureVector::append: duplicate feature '" + other.names[i] + "'");
    }
    out.names.push_back(other.names[i]);
    out.values.push_back(other.values[i]);
  }
  return out;
}

const std::vector<std::string>& statistical_feature_names() {
  static const std::vector<std::string> names = {
      "median",   "lag1_autocorrelation", "variance",        "skewness",
      "excess_kurtosis", "rice_frequency", "cumulant3", "cumulant4",
      "central_moment4", "coefficient_of_variation"};
  return names;
}

FeatureVector extract_statistical(const TimeSeries& series) {
  const auto x = series.values();
  if (x.size() < 3) throw InvalidArgument("extract_statistical: need at least 3 samples");
  const auto cm = central_moments(x);
  if (!(cm.m2 > 0.0)) throw DegenerateInput("extract_statistical: series '" + series.label() + "' is constant");
  const double sd = std::sqrt(cm.m2);
  if (std::abs(cm.mean) <= 1e-12 * sd) {
    throw DegenerateInput("extract_statistical: coefficient_of_variation undefined for zero-mean series '" +
                          series.label() + "'");
  }

  double lag1 = 0.0;
  double energy = 0.0;
  std::size_t crossings = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double d = x[t] - cm.mean;
    energy += d * d;
    if (t + 1 < x.size()) {
      const double e = x[t + 1] - cm.mean;
      lag1 += d * e;
      if ((d >= 0.0) != (e >= 0.0)) ++crossings;
    }
  }
  const double record = static_cast<double>(x.size()) * series.dt();

  FeatureVector fv;
  fv.names = statistical_feature_names();
  fv.source = series.label();
  fv.values = {median(x),
               lag1 / energy,
               cm.m2,
               cm.m3 / std::pow(cm.m2, 1.5),
               cm.m4 / (cm.m2 * cm.m2) - 3.0,
               static_cast<double>(crossings) / (2.0 * record),
               cm.m3,
               cm.m4 - 3.0 * cm.m2 * cm.m2,
               cm.m4,
               sd / std::abs(cm.mean)};
  return fv;
}

double rice_frequency_spectral(const SpectralEstimate& estimate) {
  double m0 = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < estimate.values.size(); ++k) {
    m0 += estimate.values[k];
    m2 += estimate.axis[k] * estimate.axis[k] * estimate.values[k];
  }
  if (!(m0 > 0.0)) throw DegenerateInput("rice_frequency_spectral: zero spectrum");
  return std::sqrt(m2 / m0);
}

namespace {

std::pair<std::size_t, std::size_t> band_bins(const std::vector<double>& axis, const FrequencyGrid& grid,
                                              const Band& band, std::size_t index) {
  const double tol = 1e-9 * grid.df;
  if (!(band.f_lo <= band.f_hi) || band.f_lo < -tol || band.f_hi > grid.fmax + tol) {
    throw InvalidArgument("band " + std::to_string(index) + " is outside the frequency grid");
  }
  std::size_t lo = axis.size();
  std::size_t hi = 0;
  for (std::size_t k = 0; k < axis.size(); ++k) {
    if (axis[k] >= band.f_lo - tol && axis[k] <= band.f_hi + tol) {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  }
  if (lo > hi) throw InvalidArgument("band " + std::to_string(index) + " contains no frequency bins");
  return {lo, hi};
}

std::string band_name(std::size_t i, const char* what) { return "band" + std::to_string(i) + "_" + what; }

}  // namespace

FeatureVector extract_spectral(const SpectralEstimate& estimate, std::span<const Band> bands) {
  if (bands.empty()) throw InvalidArgument("extract_spectral: no bands given");
  FeatureVector fv;
  fv.source = estimate.label;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const auto [lo, hi] = band_bins(estimate.axis, estimate.grid, bands[b], b);
    double integral = 0.0;
    std::size_t peak = lo;
    for (std::size_t k = lo; k <= hi; ++k) {
      integral += estimate.values[k];
      if (estimate.values[k] > estimate.values[peak]) peak = k;
    }
    fv.names.push_back(band_name(b, "integral"));
    fv.values.push_back(integral * estimate.grid.df);
    fv.names.push_back(band_name(b, "peak"));
    fv.values.push_back(estimate.values[peak]);
    fv.names.push_back(band_name(b, "peak_frequency"));
    fv.values.push_back(estimate.axis[peak]);
  }
  return fv;
}

FeatureVector extract_coherence(const CoherenceFunction& coherence, std::span<const Band> bands) {
  if (bands.empty()) throw InvalidArgument("extract_coherence: no bands given");
  FeatureVector fv;
  fv.source = coherence.description;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    band_bins(coherence.axis, coherence.grid, bands[b], b);
    const auto m = coherence.band_mean(bands[b].f_lo - 1e-9 * coherence.grid.df,
                                       bands[b].f_hi + 1e-9 * coherence.grid.df);
    if (!m) throw DegenerateInput("extract_coherence: band " + std::to_string(b) + " has no defined coherence bins");
    fv.names.push_back(band_name(b, "mean_gamma2"));
    fv.values.push_back(*m);
  }
  return fv;
}

DescriptionSet::DescriptionSet(std::vector<std::string> feature_names)
    : names_(std::move(feature_names)), mask_(names_.size(), true) {
  if (names_.empty()) throw InvalidArgument("DescriptionSet: need at least one feature");
}

void DescriptionSet::add(const std::string& label, std::vector<double> values) {
  if (values.size() != names_.size()) {
    throw InvalidArgument("DescriptionSet::add: description has " + std::to_string(values.size()) +
                          " features, expected " + std::to_string(names_.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("DescriptionSet::add: non-finite feature value");
  }
  auto it = std::find_if(classes_.begin(), classes_.end(), [&](const auto& c) { return c.label == label; });
  if (it == classes_.end()) {
    classes_.push_back({label, {}});
    it = classes_.end() - 1;
  }
  it->descriptions.push_back(std::move(values));
}

void DescriptionSet::add(const FeatureVector& vector) {
  if (!vector.class_label) throw InvalidArgument("DescriptionSet::add: feature vector has no class label");
  if (vector.names != names_) throw InvalidArgument("DescriptionSet::add: feature names do not match the set");
  add(*vector.class_label, vector.values);
}

std::size_t DescriptionSet::class_index(const std::string& label) const {
  for (std::size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i].label == label) return i;
  throw InvalidArgument("DescriptionSet: no class '" + label + "'");
}

std::size_t DescriptionSet::description_count() const {
  std::size_t n = 0;
  for (const auto& c : classes_) n += c.descriptions.size();
  return n;
}

void DescriptionSet::set_active_mask(std::vector<bool> mask) {
  if (mask.size() != names_.size()) throw InvalidArgument("DescriptionSet: mask length mismatch");
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw InvalidArgument("DescriptionSet: active mask must keep at least one feature");
  }
  mask_ = std::move(mask);
}

std::vector<std::size_t> DescriptionSet::active_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i]) out.push_back(i);
  return out;
}

std::vector<std::string> DescriptionSet::active_names() const {
  std::vector<std::string> out;
  for (auto i : active_indices()) out.push_back(names_[i]);
  return out;
}

std::vector<double> DescriptionSet::project(std::span<const double> full) const {
  if (full.size() != names_.size()) throw InvalidArgument("DescriptionSet::project: dimension mismatch");
  std::vector<double> out;
  for (auto i : active_indices()) out.push_back(full[i]);
  return out;
}

std::vector<double> DescriptionSet::apply_standardization(std::span<const double> full) const {
  if (full.size() != names_.size()) throw InvalidArgument("apply_standardization: dimension mismatch");
  std::vector<double> out(full.begin(), full.end());
  if (!standardization_) return out;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (out[i] - standardization_->mean[i]) / standardization_->std[i];
  return out;
}

std::string DescriptionSet::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "class";
  for (const auto& n : names_) out << ',' << n;
  out << '\n';
  for (const auto& c : classes_) {
    for (const auto& d : c.descriptions) {
      out << c.label;
      for (double v : d) out << ',' << v;
      out << '\n';
    }
  }
  return out.str();
}

DescriptionSet DescriptionSet::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::size_t row = 0;
  std::optional<DescriptionSet> set;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!set) {
      if (cells.size() < 2 || cells.front() != "class") {
        throw FormatError("description CSV: header must start with 'class'");
      }
      set.emplace(std::vector<std::string>(cells.begin() + 1, cells.end()));
      continue;
    }
    ++row;
    if (cells.size() != set->feature_count() + 1) {
      throw FormatError("description CSV: row " + std::to_string(row) + " has the wrong number of cells");
    }
    std::vector<double> values;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cells[i], &used));
        if (used != cells[i].size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw FormatError("description CSV: row " + std::to_string(row) + ": bad number '" + cells[i] + "'");
      }
    }
    set->add(cells[0], std::move(values));
  }
  if (!set) throw FormatError("description CSV: missing header");
  return std::move(*set);
}

DescriptionSet standardize(const DescriptionSet& set) {
  const std::size_t p = set.feature_count();
  const std::size_t n = set.description_count();
  if (n < 2) throw InvalidArgument("standardize: need at least 2 descriptions");
  std::vector<double> mu(p, 0.0), sd(p, 1.0);
  const auto& mask = set.active_mask();
  for (std::size_t f = 0; f < p; ++f) {
    if (!mask[f]) continue;
    std::vector<double> column;
    column.reserve(n);
    for (const auto& c : set.classes())
      for (const auto& d : c.descriptions) column.push_back(d[f]);
    mu[f] = mean(column);
    sd[f] = stddev(column);
    if (!(sd[f] > 1e-300)) {
      throw DegenerateInput("standardize: feature '" + set.feature_names()[f] +
                            "' has zero variance; deactivate it in the mask");
    }
  }

  DescriptionSet out(set.feature_names());
  for (const auto& c : set.classes()) {
    for (const auto& d : c.descriptions) {
      std::vector<double> v(d);
      for (std::size_t f = 0; f < p; ++f) v[f] = (v[f] - mu[f]) / sd[f];
      out.add(c.label, std::move(v));
    }
  }
  out.set_active_mask(set.active_mask());
  Standardization s{mu, sd};
  if (const auto& prev = set.standardization()) {
    for (std::size_t f = 0; f < p; ++f) {
      s.mean[f] = prev->mean[f] + prev->std[f] * mu[f];
      s.std[f] = prev->std[f] * sd[f];
    }
  }
  out.set_standardization(std::move(s));
  return out;
}

}  // namespace ulfkit
