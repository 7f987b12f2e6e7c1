#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ulfkit/coherence.hpp"
#include "ulfkit/event_analysis.hpp"
#include "ulfkit/features.hpp"
#include "ulfkit/fitting.hpp"
#include "ulfkit/preprocess.hpp"
#include "ulfkit/recognition.hpp"
#include "ulfkit/spectral.hpp"

namespace ulfkit {

using json = nlohmann::json;

const char* version();

// Shortest decimal that round-trips; identical on every run.
std::string format_double(double v);

// FNV-1a 64 over the compact dump of a json value (keys sorted), hex.
std::string config_hash(const json& config);

struct OutputHeader {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
};

// "# key: value" lines opening every CSV output.
void write_header(std::ostream& out, const OutputHeader& header);

json to_json(const FrequencyGrid& grid);
json to_json(const PreprocessReport& report);
json to_json(const DescriptionSet& set);
DescriptionSet description_set_from_json(const json& j);
json to_json(const SeparatingModel& model);
SeparatingModel separating_model_from_json(const json& j);
json to_json(const MinimizationResult& result);
MinimizationResult minimization_from_json(const json& j);
json to_json(const FitResult& fit);
json to_json(const Whiteness& w);
json to_json(const ModelComparison& comparison);
json to_json(const HarmonicTable& table);
json to_json(const SeriesVerdict& verdict, const HarmonicTable& table);
json to_json(const NearMonthlyVerdict& verdict);
json to_json(const NullThreshold& null, bool include_statistics = false);

// Plot-ready tables. Undefined coherence bins are written as empty cells
// with a 0 in the matching _defined column.
void write_spectrum_csv(std::ostream& out, const SpectralEstimate& estimate);
void write_coherence_csv(std::ostream& out, const std::vector<CoherenceFunction>& functions);
// Long form: one row per (bin, i, j).
void write_spectral_matrix_csv(std::ostream& out, const SpectralMatrix& s);
void write_harmonics_csv(std::ostream& out, const HarmonicTable& table, const SeriesVerdict* verdict);
void write_fit_csv(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y, const FitResult& fit);

}  // namespace ulfkit
