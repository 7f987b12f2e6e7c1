#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pipeline_config.hpp"

namespace ulfkit::cli {

struct RunContext {
  PipelineConfig config;
  std::string command;
  std::uint64_t seed = 0;
  bool verbose = false;
};

// Files are produced in memory and written only once the whole command has
// succeeded, so a failing run leaves no partial output behind.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
};

Outputs cmd_psd(const RunContext& ctx);
Outputs cmd_coherence(const RunContext& ctx);
Outputs cmd_features(const RunContext& ctx);
Outputs cmd_minimize(const RunContext& ctx);
Outputs cmd_classify(const RunContext& ctx);
Outputs cmd_fit(const RunContext& ctx);
Outputs cmd_harmonics(const RunContext& ctx);

}  // namespace ulfkit::cli
