#pragma once

// End-to-end experiment drivers: run, then write trajectories and a summary
// JSON below an output directory. The CLI is a thin wrapper around these.

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "yoto/config.hpp"
#include "yoto/export.hpp"
#include "yoto/gradcheck.hpp"

namespace yoto {

struct OutputOptions {
  std::filesystem::path dir;
  std::vector<ExportFormat> formats = {ExportFormat::kCsv};
};

struct ExperimentOutcome {
  nlohmann::json summary;  // also written to <dir>/<name>/summary.json
  bool diverged = false;   // some run diverged; partial outputs were written
};

/// One run per configured seed in the configured mode.
ExperimentOutcome train_experiment(const ExperimentConfig& config, const OutputOptions& out);
ExperimentOutcome grid_experiment(const ExperimentConfig& config, const OutputOptions& out);
/// Uses config.seeds; YOTO mode.
ExperimentOutcome seed_study_experiment(const ExperimentConfig& config, const OutputOptions& out);
/// Uses config.init_epsilons.
ExperimentOutcome init_sweep_experiment(const ExperimentConfig& config, const OutputOptions& out);

struct GradCheckSuite {
  HpCheckOptions hp;
  ModelCheckOptions model;
};

/// HP, regularizer and both model-gradient checks. `pass` is the conjunction.
struct GradCheckSuiteResult {
  std::vector<GradCheckReport> reports;
  bool pass = true;
  nlohmann::json to_json() const;
};

GradCheckSuiteResult run_gradcheck_suite(const GradCheckSuite& suite);

}  // namespace yoto
