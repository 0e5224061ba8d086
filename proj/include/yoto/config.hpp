#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "yoto/models.hpp"
#include "yoto/optimizers.hpp"

namespace yoto {

enum class TrainingMode { kYoto, kFixed };

/// Fixed-weight grid. Either one value list per auxiliary loss (the full
/// Cartesian product of raw exp(mu_i) values, with exp(mu_0) = 1), or, for a
/// single auxiliary loss, a list of log10(lambda_1 / lambda_0) ratios.
struct GridSpec {
  std::vector<std::vector<double>> axes;
  std::vector<double> log_ratios;

  bool empty() const noexcept { return axes.empty() && log_ratios.empty(); }
  /// Raw (unnormalized) weight vectors, leading entry 1.
  std::vector<std::vector<double>> points() const;
};

struct ExperimentConfig {
  ToyModelSpec model;
  std::uint64_t data_seed = 1;
  std::size_t n_train = 64;
  std::size_t n_val = 1000;

  OptimizerConfig optimizer;
  // Multiplies alpha; lets a baseline keep an unnormalized effective rate.
  double lr_scale = 1.0;

  std::int64_t steps = 5000;
  std::size_t batch_size = 16;
  std::int64_t record_every = 50;

  TrainingMode mode = TrainingMode::kYoto;
  std::vector<double> fixed_weights;  // raw, leading entry is exp(mu_0)

  GridSpec grid;
  std::vector<std::uint64_t> seeds = {0};
  std::vector<double> init_epsilons;
  double cluster_threshold = 0.05;

  std::size_t threads = 0;  // 0: hardware concurrency
  std::filesystem::path output_dir = "yoto_out";

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Raw key/value pairs in file order of last assignment.
using ConfigEntries = std::map<std::string, std::string>;

/// Parses "key = value" lines; '#' starts a comment. Throws ConfigError on
/// malformed lines.
ConfigEntries parse_config_text(const std::string& text);
ConfigEntries load_config_entries(const std::filesystem::path& path);

/// Applies "key=value"; later overrides win.
void apply_override(ConfigEntries& entries, const std::string& assignment);

/// Builds a validated config. Unknown keys raise ConfigError.
ExperimentConfig build_config(const ConfigEntries& entries);

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// Inverse of build_config for every documented key.
ConfigEntries to_entries(const ExperimentConfig& config);
std::string to_config_text(const ExperimentConfig& config);

/// Documented keys, for usage text and override validation.
const std::vector<std::string>& config_keys();

}  // namespace yoto
