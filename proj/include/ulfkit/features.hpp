#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ulfkit/coherence.hpp"
#include "ulfkit/signal_model.hpp"
#include "ulfkit/spectral.hpp"

namespace ulfkit {

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;
  std::string source;
  std::optional<std::string> class_label;

  std::size_t size() const { return values.size(); }
  double get(const std::string& name) const;
  // Concatenation; names must not collide.
  FeatureVector append(const FeatureVector& other) const;
};

// The ten statistical features, in order: median, lag-1 autocorrelation,
// variance, skewness, excess kurtosis, Rice frequency (zero crossings / 2T),
// third cumulant, fourth cumulant, fourth central moment, coefficient of
// variation. Population normalization throughout.
FeatureVector extract_statistical(const TimeSeries& series);

const std::vector<std::string>& statistical_feature_names();

// sqrt(sum f^2 G / sum G), the spectral-moment estimate of the Rice frequency.
double rice_frequency_spectral(const SpectralEstimate& estimate);

struct Band {
  double f_lo = 0.0;
  double f_hi = 0.0;
};

// Per band: integral (sum G df over bins inside [f_lo, f_hi]), peak value and
// peak frequency.
FeatureVector extract_spectral(const SpectralEstimate& estimate, std::span<const Band> bands);
// Per band: mean of defined coherence bins.
FeatureVector extract_coherence(const CoherenceFunction& coherence, std::span<const Band> bands);

struct Standardization {
  std::vector<double> mean;
  std::vector<double> std;
};

// Labelled descriptions grouped by class, in insertion order.
class DescriptionSet {
 public:
  struct ClassData {
    std::string label;
    std::vector<std::vector<double>> descriptions;
  };

  explicit DescriptionSet(std::vector<std::string> feature_names);

  void add(const std::string& label, std::vector<double> values);
  void add(const FeatureVector& vector);

  const std::vector<std::string>& feature_names() const { return names_; }
  std::size_t feature_count() const { return names_.size(); }
  const std::vector<ClassData>& classes() const { return classes_; }
  std::size_t class_count() const { return classes_.size(); }
  std::size_t class_index(const std::string& label) const;
  std::size_t description_count() const;

  const std::vector<bool>& active_mask() const { return mask_; }
  void set_active_mask(std::vector<bool> mask);
  std::vector<std::size_t> active_indices() const;
  std::vector<std::string> active_names() const;

  const std::optional<Standardization>& standardization() const { return standardization_; }
  void set_standardization(Standardization s) { standardization_ = std::move(s); }

  // Restrict a full-length vector to the active features.
  std::vector<double> project(std::span<const double> full) const;
  // Apply stored standardization to an unseen full-length vector.
  std::vector<double> apply_standardization(std::span<const double> full) const;

  // One row per description: class, features...
  std::string to_csv() const;
  static DescriptionSet from_csv(const std::string& text);

 private:
  std::vector<std::string> names_;
  std::vector<ClassData> classes_;
  std::vector<bool> mask_;
  std::optional<Standardization> standardization_;
};

// Zero pooled mean and unit pooled (population) std for each active feature.
DescriptionSet standardize(const DescriptionSet& set);

}  // namespace ulfkit
