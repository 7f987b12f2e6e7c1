#include "ulfkit/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ulfkit/errors.hpp"
#include "ulfkit/stats.hpp"

namespace ulfkit {
namespace {

// Ridge on the correlation-scaled pooled covariance, relative to its mean
// diagonal (1 after scaling for every feature with within-class spread).
constexpr double kCovarianceRidge = 1e-8;

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<std::size_t> mask_to_indices(const std::vector<bool>& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(i);
  return out;
}

MarginStats summarize(const std::vector<double>& margins) {
  MarginStats s;
  if (margins.empty()) return s;
  s.min = *std::min_element(margins.begin(), margins.end());
  s.mean = std::accumulate(margins.begin(), margins.end(), 0.0) / static_cast<double>(margins.size());
  return s;
}

double worst_margin(const DescriptionSet& set, const std::vector<std::size_t>& features) {
  const auto m = description_margins(set, features);
  return *std::min_element(m.begin(), m.end());
}

}  // namespace

D2Metric::D2Metric(const DescriptionSet& set, std::vector<std::size_t> features) : features_(std::move(features)) {
  if (features_.empty()) throw InvalidArgument("D2: no active features");
  const std::size_t p = features_.size();
  const std::size_t k = set.class_count();
  std::size_t n = 0;
  class_means_.assign(k, std::vector<double>(p, 0.0));
  for (std::size_t c = 0; c < k; ++c) {
    const auto& descr = set.classes()[c].descriptions;
    if (descr.size() < 2) {
      throw InvalidArgument("D2: class '" + set.classes()[c].label + "' needs at least 2 descriptions");
    }
    for (const auto& d : descr)
      for (std::size_t f = 0; f < p; ++f) class_means_[c][f] += d[features_[f]];
    for (auto& v : class_means_[c]) v /= static_cast<double>(descr.size());
    n += descr.size();
  }

  RealMatrix cov(p, p);
  for (std::size_t c = 0; c < k; ++c) {
    for (const auto& d : set.classes()[c].descriptions) {
      for (std::size_t a = 0; a < p; ++a) {
        const double da = d[features_[a]] - class_means_[c][a];
        for (std::size_t b = a; b < p; ++b) cov(a, b) += da * (d[features_[b]] - class_means_[c][b]);
      }
    }
  }
  const double dof = static_cast<double>(n - k);
  scale_.resize(p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      cov(a, b) /= dof;
      cov(b, a) = cov(a, b);
    }
    scale_[a] = std::sqrt(cov(a, a));
  }
  // A feature without within-class spread keeps a zero diagonal and is held
  // by the ridge alone; scale it by its overall spread (or 1 when constant).
  for (std::size_t a = 0; a < p; ++a) {
    if (scale_[a] > 0.0) continue;
    std::vector<double> column;
    for (const auto& c : set.classes())
      for (const auto& d : c.descriptions) column.push_back(d[features_[a]]);
    const double spread = stddev(column);
    scale_[a] = spread > 0.0 ? spread : 1.0;
  }
  RealMatrix corr(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) corr(a, b) = cov(a, b) / (scale_[a] * scale_[b]);
  for (std::size_t a = 0; a < p; ++a) corr(a, a) += kCovarianceRidge;

  std::size_t failed = 0;
  try {
    inverse_ = gauss_solve_multi(corr, RealMatrix::identity(p), &failed);
  } catch (const SingularMatrix&) {
    throw NumericalError("D2: pooled covariance not invertible; feature '" +
                         set.feature_names()[features_[std::min(failed, p - 1)]] +
                         "' is collinear with the others");
  }
}

double D2Metric::distance(std::span<const double> full, std::size_t class_index) const {
  const std::size_t p = features_.size();
  std::vector<double> z(p);
  for (std::size_t f = 0; f < p; ++f) z[f] = (full[features_[f]] - class_means_.at(class_index)[f]) / scale_[f];
  double d2 = 0.0;
  for (std::size_t a = 0; a < p; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < p; ++b) row += inverse_(a, b) * z[b];
    d2 += z[a] * row;
  }
  return std::max(d2, 0.0);
}

double d2_similarity(std::span<const double> x, const std::string& label, const DescriptionSet& set) {
  if (x.size() != set.feature_count()) throw InvalidArgument("d2_similarity: dimension mismatch");
  const D2Metric metric(set, set.active_indices());
  return metric.distance(x, set.class_index(label));
}

std::vector<double> description_margins(const DescriptionSet& set, const std::vector<std::size_t>& features) {
  if (set.class_count() < 2) throw InvalidArgument("margins: need at least 2 classes");
  const D2Metric metric(set, features);
  std::vector<double> margins;
  margins.reserve(set.description_count());
  for (std::size_t j = 0; j < set.class_count(); ++j) {
    for (const auto& d : set.classes()[j].descriptions) {
      const double own = metric.distance(d, j);
      double other = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < set.class_count(); ++k)
        if (k != j) other = std::min(other, metric.distance(d, k));
      margins.push_back(other - own);
    }
  }
  return margins;
}

double default_resolution_threshold(const DescriptionSet& set) {
  // Leaving a description out of its class mean scales its own-class
  // distance by (n / (n - 1))^2; the margin moves by exactly that much.
  const D2Metric metric(set, set.active_indices());
  std::vector<double> shifts;
  for (std::size_t j = 0; j < set.class_count(); ++j) {
    const auto& descr = set.classes()[j].descriptions;
    const double n = static_cast<double>(descr.size());
    const double factor = (n / (n - 1.0)) * (n / (n - 1.0)) - 1.0;
    for (const auto& d : descr) shifts.push_back(metric.distance(d, j) * factor);
  }
  return percentile(std::move(shifts), 0.95);
}

SeparatingModel train_potential(const DescriptionSet& set, std::size_t max_epochs) {
  if (set.class_count() < 2) throw InvalidArgument("train_potential: need at least 2 classes");
  for (const auto& c : set.classes()) {
    if (c.descriptions.empty()) throw InvalidArgument("train_potential: class '" + c.label + "' is empty");
  }
  SeparatingModel model;
  model.feature_indices = set.active_indices();
  model.feature_names = set.active_names();
  for (const auto& c : set.classes()) model.class_labels.push_back(c.label);
  const std::size_t p = model.feature_indices.size();
  model.coefficients.assign(set.class_count(), std::vector<double>(p + 1, 0.0));

  // Round-robin over classes so no class dominates the early updates.
  std::vector<std::pair<std::size_t, std::vector<double>>> order;
  std::size_t longest = 0;
  for (const auto& c : set.classes()) longest = std::max(longest, c.descriptions.size());
  for (std::size_t i = 0; i < longest; ++i)
    for (std::size_t k = 0; k < set.class_count(); ++k)
      if (i < set.classes()[k].descriptions.size()) order.emplace_back(k, set.project(set.classes()[k].descriptions[i]));

  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    std::size_t errors = 0;
    for (const auto& [truth, x] : order) {
      const auto predicted = classify(model, x).class_index;
      if (predicted == truth) continue;
      ++errors;
      auto& up = model.coefficients[truth];
      auto& down = model.coefficients[predicted];
      up[0] += 1.0;
      down[0] -= 1.0;
      for (std::size_t l = 0; l < p; ++l) {
        up[l + 1] += 4.0 * x[l];
        down[l + 1] -= 4.0 * x[l];
      }
    }
    model.log.push_back({epoch, errors});
    if (errors == 0) {
      model.converged = true;
      break;
    }
  }
  return model;
}

Classification classify(const SeparatingModel& model, std::span<const double> x) {
  if (x.size() != model.dimension()) {
    throw InvalidArgument("classify: expected " + std::to_string(model.dimension()) + " features, got " +
                          std::to_string(x.size()));
  }
  Classification out;
  out.scores.resize(model.coefficients.size());
  for (std::size_t k = 0; k < model.coefficients.size(); ++k) {
    const auto& c = model.coefficients[k];
    double g = c[0];
    for (std::size_t l = 0; l < x.size(); ++l) g += c[l + 1] * x[l];
    out.scores[k] = g;
    if (g > out.scores[out.class_index]) out.class_index = k;
  }
  out.label = model.class_labels[out.class_index];
  return out;
}

std::vector<bool> replay_trace(std::vector<bool> mask, const std::vector<TraceStep>& trace) {
  for (const auto& step : trace) {
    if (step.feature >= mask.size()) throw InvalidArgument("replay_trace: feature index out of range");
    mask[step.feature] = step.action == TraceStep::Action::add;
  }
  return mask;
}

MinimizationResult minimize_resolution(const DescriptionSet& set, const ResolutionOptions& options) {
  MinimizationResult result;
  result.method = "resolution";
  result.seed = options.seed;
  result.delta = options.delta ? *options.delta : default_resolution_threshold(set);
  if (!(result.delta >= 0.0)) throw InvalidArgument("minimize_resolution: delta must be >= 0");

  std::vector<bool> current = set.active_mask();
  result.mask = current;
  double current_worst = worst_margin(set, mask_to_indices(current));
  if (!(current_worst > result.delta)) {
    result.non_separable = true;
    result.margins = summarize(description_margins(set, mask_to_indices(current)));
    return result;
  }

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> removed;  // in removal order
  std::vector<TraceStep> trace;
  std::size_t best_trace_len = 0;
  std::size_t best_size = mask_to_indices(current).size();
  double best_worst = current_worst;
  std::vector<std::size_t> tabu;

  auto count = [](const std::vector<bool>& m) { return static_cast<std::size_t>(std::count(m.begin(), m.end(), true)); };

  for (;;) {
    while (count(current) > 1) {
      std::size_t choice = current.size();
      double choice_worst = -std::numeric_limits<double>::infinity();
      for (std::size_t f = 0; f < current.size(); ++f) {
        if (!current[f] || std::find(tabu.begin(), tabu.end(), f) != tabu.end()) continue;
        auto trial = current;
        trial[f] = false;
        const double w = worst_margin(set, mask_to_indices(trial));
        if (w > result.delta && w > choice_worst) {
          choice = f;
          choice_worst = w;
        }
      }
      tabu.clear();
      if (choice == current.size()) break;
      current[choice] = false;
      current_worst = choice_worst;
      removed.push_back(choice);
      trace.push_back({TraceStep::Action::remove, choice, set.feature_names()[choice], choice_worst});
      const std::size_t size = count(current);
      if (size < best_size || (size == best_size && current_worst > best_worst)) {
        best_size = size;
        best_worst = current_worst;
        best_trace_len = trace.size();
      }
    }
    // A single survivor cannot be improved on.
    if (best_size == 1 || result.restarts >= options.max_restarts || removed.size() < 2) break;

    // Stall: bring back the last removed feature and one earlier one at random.
    const std::size_t last = removed.back();
    removed.pop_back();
    const std::size_t pick = static_cast<std::size_t>(rng() % removed.size());
    const std::size_t earlier = removed[pick];
    removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(pick));
    for (std::size_t f : {last, earlier}) {
      current[f] = true;
      current_worst = worst_margin(set, mask_to_indices(current));
      trace.push_back({TraceStep::Action::add, f, set.feature_names()[f], current_worst});
    }
    tabu = {last, earlier};
    ++result.restarts;
  }

  trace.resize(best_trace_len);
  result.trace = std::move(trace);
  result.mask = replay_trace(set.active_mask(), result.trace);
  result.margins = summarize(description_margins(set, mask_to_indices(result.mask)));
  return result;
}

MinimizationResult minimize_dispersion(const DescriptionSet& set, const DispersionOptions& options) {
  const auto active = set.active_indices();
  if (options.keep && (*options.keep < 1 || *options.keep > active.size())) {
    throw InvalidArgument("minimize_dispersion: keep must be in 1.." + std::to_string(active.size()));
  }
  if (!options.keep && !options.min_dispersion) {
    throw InvalidArgument("minimize_dispersion: give either keep or min_dispersion");
  }

  const auto model = train_potential(set, options.max_epochs);
  MinimizationResult result;
  result.method = "dispersion";
  result.dispersion.assign(set.feature_count(), 0.0);
  for (std::size_t l = 0; l < active.size(); ++l) {
    std::vector<double> column;
    for (const auto& c : model.coefficients) column.push_back(c[l + 1]);
    result.dispersion[active[l]] = variance(column);
  }
  result.ranking = active;
  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [&](std::size_t a, std::size_t b) { return result.dispersion[a] > result.dispersion[b]; });

  std::size_t keep = 0;
  if (options.keep) {
    keep = *options.keep;
  } else {
    for (auto f : result.ranking)
      if (result.dispersion[f] >= *options.min_dispersion) ++keep;
    keep = std::max<std::size_t>(keep, 1);
  }

  std::vector<bool> mask = set.active_mask();
  for (std::size_t r = result.ranking.size(); r-- > keep;) {
    const std::size_t f = result.ranking[r];
    mask[f] = false;
    double worst = std::numeric_limits<double>::quiet_NaN();
    try {
      worst = worst_margin(set, mask_to_indices(mask));
    } catch (const InvalidArgument&) {
      // margins need >= 2 descriptions per class; the ranking does not
    } catch (const NumericalError&) {
    }
    result.trace.push_back({TraceStep::Action::remove, f, set.feature_names()[f], worst});
  }
  result.mask = mask;

  DescriptionSet reduced = set;
  reduced.set_active_mask(mask);
  const auto retrained = train_potential(reduced, options.max_epochs);
  result.non_separable = !retrained.converged;
  try {
    result.margins = summarize(description_margins(set, mask_to_indices(mask)));
  } catch (const InvalidArgument&) {
    result.margins = {};
  } catch (const NumericalError&) {
    result.margins = {};
  }
  return result;
}

}  // namespace ulfkit
