#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ulfkit/errors.hpp"
#include "ulfkit/event_analysis.hpp"
#include "ulfkit/features.hpp"
#include "ulfkit/fitting.hpp"
#include "ulfkit/preprocess.hpp"
#include "ulfkit/serialization.hpp"
#include "ulfkit/spectral.hpp"

namespace ulfkit::cli {

// Bad configuration: unknown key, wrong type, out-of-range value.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class InputFormat { series, events };

struct InputSpec {
  std::filesystem::path path;
  InputFormat format = InputFormat::series;
  std::vector<std::string> channels;  // empty: all
  // events only
  double bin_width = 3600.0;
  EventMode mode = EventMode::binary;
  std::optional<double> t_start;
  std::optional<std::size_t> n_bins;
};

struct SpectralConfig {
  PsdOptions psd;
  std::size_t smoothing_span = 1;
  bool cepstrum = false;
};

struct PreprocessConfig {
  ConditionOptions condition;
  std::size_t stationarity_segments = 0;  // 0: skip the test
  double alpha = 0.05;
};

struct PairSpec {
  std::string a;
  std::string b;
  std::vector<std::string> given;
};

struct MultipleSpec {
  std::string output;
  std::vector<std::string> inputs;
};

struct CoherenceConfig {
  std::vector<PairSpec> ordinary;
  std::vector<PairSpec> partial;
  std::vector<MultipleSpec> multiple;
  std::vector<PairSpec> gain_phase;
  std::vector<Band> bands;
};

struct LabelledInput {
  InputSpec input;
  std::string label;
};

struct FeaturesConfig {
  std::vector<LabelledInput> inputs;
  bool statistical = true;
  std::vector<Band> bands;
};

struct MinimizeConfig {
  std::optional<std::filesystem::path> descriptions;
  std::string method = "resolution";
  std::optional<double> delta;
  std::size_t max_restarts = 10;
  std::optional<std::size_t> keep;
  std::optional<double> min_dispersion;
  std::size_t max_epochs = 100;
  bool standardize = true;
};

struct ClassifyConfig {
  std::optional<std::filesystem::path> training;  // description set json/csv
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> inputs;    // descriptions to label (csv)
  std::size_t max_epochs = 100;
};

struct FitConfig {
  std::string column;
  std::vector<std::string> models{"polynomial:1"};
  std::vector<ModelSpec> specs;
  std::string method = "mnk";
  std::optional<double> epsilon_floor;
  std::size_t max_iter = 200;
};

struct HarmonicsConfig {
  EventPsdOptions psd;
  double alpha = 0.05;
  std::size_t n_shuffles = 99;
  SeriesOptions series;
  bool near_monthly = false;
  NearMonthlyOptions monthly;
};

struct PipelineConfig {
  std::optional<InputSpec> input;
  PreprocessConfig preprocess;
  SpectralConfig spectral;
  CoherenceConfig coherence;
  FeaturesConfig features;
  MinimizeConfig minimize;
  ClassifyConfig classify;
  FitConfig fit;
  HarmonicsConfig harmonics;
  std::optional<std::filesystem::path> out;
  std::uint64_t seed = 0;
  json raw;  // as given, for the hash and the report
};

// "polynomial:2", "exp_poly:1", "sum_of_exponentials:2".
ModelSpec parse_model(const std::string& text);

// Validates every section; paths are resolved against `base_dir`.
PipelineConfig parse_config(const json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace ulfkit::cli
