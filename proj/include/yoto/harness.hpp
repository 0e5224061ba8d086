#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "yoto/config.hpp"

namespace yoto {

/// State after step t (t = 0 is the initial state). Losses are full
/// training-set values at the current parameters.
struct TrajectoryRecord {
  std::int64_t t = 0;
  std::vector<double> mu;
  std::vector<double> lambda;
  std::vector<double> losses;
  double composite = 0.0;    // lambda^T l
  double regularizer = 0.0;  // L_r(mu), 0 when rho = 0 or weights are fixed
  double val_basic_loss = 0.0;

  bool operator==(const TrajectoryRecord&) const = default;
};

struct RunResult {
  std::uint64_t seed = 0;
  TrajectoryRecord final_record;
  double best_val_basic_loss = 0.0;
  std::int64_t best_step = 0;
  bool diverged = false;
  std::string error;
  double wall_time_s = 0.0;
};

struct RunOutput {
  RunResult result;
  std::vector<TrajectoryRecord> trajectory;
  std::vector<double> final_parameters;
};

/// One full training run for the given seed. The seed drives parameter
/// initialization and batch order; the dataset depends on data_seed only.
/// Divergence is reported in the result with the partial trajectory kept.
RunOutput run_training(const ExperimentConfig& config, std::uint64_t seed);

struct GridRow {
  std::size_t point = 0;
  std::vector<double> raw_weights;
  std::vector<double> lambda;
  std::uint64_t seed = 0;
  double final_val_basic_loss = 0.0;
  bool diverged = false;
};

struct GridPointSummary {
  std::size_t point = 0;
  std::vector<double> raw_weights;
  std::vector<double> lambda;
  double mean_val_basic_loss = 0.0;
  double std_val_basic_loss = 0.0;
  std::size_t completed_runs = 0;
};

struct GridResult {
  std::vector<GridRow> rows;
  std::vector<GridPointSummary> points;
  std::size_t best_point = 0;  // lowest mean validation basic loss
  std::vector<RunOutput> runs;  // same order as rows
};

/// One fixed-weight run per grid point and seed. Diverged runs are kept in
/// the table and excluded from the point means.
GridResult run_grid_search(const ExperimentConfig& config);

struct SeedStudyReport {
  std::vector<std::uint64_t> seeds;
  std::vector<RunOutput> runs;
  std::vector<std::vector<double>> final_mu;
  double max_pairwise_final_mu_distance = 0.0;  // Euclidean over all mu_i
  double max_pairwise_final_mu1_distance = 0.0;
  double mu1_range = 0.0;  // max - min of mu_1 over every recorded step of every seed
  std::vector<double> step_spread;  // per record index: max_i (max - min over seeds)
  double max_step_spread = 0.0;
  double mean_val_basic_loss = 0.0;
  double std_val_basic_loss = 0.0;
};

/// Runs config in its own mode once per seed. Needs >= 2 seeds.
SeedStudyReport run_seed_study(const ExperimentConfig& config,
                               const std::vector<std::uint64_t>& seeds);

struct InitSweepReport {
  std::vector<double> epsilons;
  std::vector<RunOutput> runs;
  std::vector<std::vector<double>> final_mu;
  std::vector<std::vector<double>> final_lambda;
  std::vector<std::size_t> cluster_of;  // per epsilon
  std::vector<std::vector<double>> cluster_centers;
  double threshold = 0.0;
};

/// One YOTO run per epsilon with the first configured seed. Endpoints are the
/// final weights lambda, not mu: the exponent of a rejected term keeps
/// drifting toward -inf while its weight has already settled at ~0. They are
/// grouped greedily: an endpoint joins the first cluster whose founding
/// endpoint lies within `threshold` (Euclidean), otherwise it starts one.
InitSweepReport run_init_sweep(const ExperimentConfig& config,
                               const std::vector<double>& epsilons);

/// Groups points as described for run_init_sweep. Returns cluster ids and
/// fills centers with the mean of each cluster.
std::vector<std::size_t> cluster_endpoints(const std::vector<std::vector<double>>& points,
                                           double threshold,
                                           std::vector<std::vector<double>>* centers = nullptr);

double mean(const std::vector<double>& xs);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_std(const std::vector<double>& xs);

}  // namespace yoto
