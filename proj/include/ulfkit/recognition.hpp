#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulfkit/features.hpp"
#include "ulfkit/linalg.hpp"

namespace ulfkit {

// Pooled within-class covariance over the active features plus the class
// means, ready for repeated D^2 evaluations.
class D2Metric {
 public:
  // `features` indexes into the set's full feature list.
  D2Metric(const DescriptionSet& set, std::vector<std::size_t> features);

  // Squared Mahalanobis distance of a full-length description to class k.
  double distance(std::span<const double> full, std::size_t class_index) const;
  const std::vector<std::size_t>& features() const { return features_; }

 private:
  std::vector<std::size_t> features_;
  std::vector<std::vector<double>> class_means_;  // over `features_`
  std::vector<double> scale_;                      // pooled std per feature
  RealMatrix inverse_;                             // (R + ridge I)^-1 on the scaled features
};

// D^2 of a full-length description x to the mean of `label`, using the active
// features of `set`.
double d2_similarity(std::span<const double> x, const std::string& label, const DescriptionSet& set);

struct TrainingEpoch {
  std::size_t epoch = 0;
  std::size_t errors = 0;
};

// g_k(x) = c_k0 + sum_l c_kl x_l, grown by error correction with the kernel
// K(x, x_k) = 1 + 4 <x, x_k>.
struct SeparatingModel {
  std::vector<std::string> class_labels;
  std::vector<std::string> feature_names;        // active features, in order
  std::vector<std::size_t> feature_indices;      // into the training set's full list
  std::vector<std::vector<double>> coefficients;  // [class][0 = constant, 1.. = features]
  std::vector<TrainingEpoch> log;
  bool converged = false;

  std::size_t dimension() const { return feature_names.size(); }
};

SeparatingModel train_potential(const DescriptionSet& set, std::size_t max_epochs = 100);

struct Classification {
  std::size_t class_index = 0;
  std::string label;
  std::vector<double> scores;
};

// x holds the model's active features. Ties go to the lowest class index.
Classification classify(const SeparatingModel& model, std::span<const double> x);

struct TraceStep {
  enum class Action { remove, add };
  Action action = Action::remove;
  std::size_t feature = 0;
  std::string name;
  double worst_margin = 0.0;  // after the step
};

struct MarginStats {
  double min = 0.0;
  double mean = 0.0;
};

struct MinimizationResult {
  std::string method;
  std::vector<bool> mask;
  std::vector<TraceStep> trace;
  MarginStats margins;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::size_t restarts = 0;
  bool non_separable = false;
  // Dispersion method only: per-feature coefficient dispersion and the ranking.
  std::vector<double> dispersion;
  std::vector<std::size_t> ranking;
};

// margin(i, j) = min_{k != j} D^2(x_ij, k) - D^2(x_ij, j) for every
// description under the given feature subset.
std::vector<double> description_margins(const DescriptionSet& set, const std::vector<std::size_t>& features);

// 95th percentile of |margin - leave-one-out margin| over all descriptions.
double default_resolution_threshold(const DescriptionSet& set);

struct ResolutionOptions {
  std::optional<double> delta;  // default: default_resolution_threshold
  std::uint64_t seed = 0;
  std::size_t max_restarts = 10;
};

// Greedy backward elimination under the resolution condition (every margin
// > delta), with the random re-add restart on stalls.
MinimizationResult minimize_resolution(const DescriptionSet& set, const ResolutionOptions& options = {});

struct DispersionOptions {
  std::optional<std::size_t> keep;           // number of features to keep
  std::optional<double> min_dispersion;      // or a dispersion threshold
  std::size_t max_epochs = 100;
};

// Ranks features by the variance of their separating-function coefficients
// across classes and keeps the top ones.
MinimizationResult minimize_dispersion(const DescriptionSet& set, const DispersionOptions& options);

// Applies a trace to the starting mask (the set's active mask).
std::vector<bool> replay_trace(std::vector<bool> start, const std::vector<TraceStep>& trace);

}  // namespace ulfkit
