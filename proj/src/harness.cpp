#include "yoto/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "yoto/errors.hpp"
#include "yoto/loss_layer.hpp"
#include "yoto/optimizers.hpp"

namespace yoto {

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each call writes only
// its own slot, so the output order is independent of scheduling.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, std::size_t threads, F&& fn) {
  std::vector<T> out(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            out[i] = fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Per-epoch shuffled sequential mini-batches.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch_size, std::mt19937_64& rng)
      : order_(n), batch_size_(std::min(batch_size, n)), rng_(rng) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
  }

  std::span<const std::size_t> next() {
    if (cursor_ >= order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    const std::size_t len = std::min(batch_size_, order_.size() - cursor_);
    std::span<const std::size_t> rows(order_.data() + cursor_, len);
    cursor_ += len;
    return rows;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  std::size_t cursor_ = 0;
  std::mt19937_64& rng_;
};

}  // namespace

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

RunOutput run_training(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto model = make_model(config.model);
  const SyntheticTask task =
      make_synthetic_dataset(config.model, config.data_seed, config.n_train, config.n_val);
  const BatchView full_train(task.train);
  const BatchView full_val(task.validation);

  std::mt19937_64 rng(seed);
  ParamState params(model->init_parameters(rng));
  BatchSampler sampler(task.train.size(), config.batch_size, rng);

  OptimizerConfig opt = config.optimizer;
  opt.alpha *= config.lr_scale;
  opt.total_steps = config.steps;

  const bool yoto = config.mode == TrainingMode::kYoto;
  const std::size_t k_aux = config.model.aux_terms.size();
  std::optional<LossWeights> fixed;
  HPState hps = init_hp_state(k_aux, opt.init_epsilon);
  if (!yoto) {
    fixed = LossWeights::normalized(config.fixed_weights);
    std::vector<double> mu(fixed->size());
    for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = std::log((*fixed)[i] / (*fixed)[0]);
    mu[0] = 0.0;
    hps = HPState(HPExponents(std::move(mu)));
  }
  const std::vector<double> zero_h(k_aux + 1, 0.0);

  RunOutput out;
  out.result.seed = seed;

  auto record = [&](std::int64_t t) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.mu = hps.mu.values();
    rec.lambda = yoto ? softmax_weights(hps.mu).values() : fixed->values();
    rec.losses = model->eval_losses(params.w, full_train).values;
    rec.composite = composite_loss(LossWeights(rec.lambda), rec.losses);
    rec.regularizer = (yoto && opt.hp_decay > 0.0) ? regularizer_value(hps.mu, opt.hp_decay) : 0.0;
    rec.val_basic_loss = model->eval_losses(params.w, full_val)[0];
    out.trajectory.push_back(std::move(rec));
  };

  try {
    record(0);
    for (std::int64_t t = 1; t <= config.steps; ++t) {
      const BatchView batch(task.train, sampler.next());
      const LossVector losses = model->eval_losses(params.w, batch);
      const LossWeights lambda = yoto ? softmax_weights(hps.mu) : *fixed;
      const std::vector<double> g = model->eval_param_gradient(params.w, batch, lambda);
      const std::vector<double> h = yoto ? hp_gradient_empirical(hps.mu, losses.values) : zero_h;
      auto [next_params, next_hps] = yoto_step(params, hps, g, h, t, opt);
      params = std::move(next_params);
      if (yoto) hps = std::move(next_hps);
      if (t % config.record_every == 0 || t == config.steps) record(t);
    }
  } catch (const NumericalError& e) {
    out.result.diverged = true;
    out.result.error = e.what();
  } catch (const std::invalid_argument& e) {
    // Weights that underflow or overflow on the way to divergence land here.
    out.result.diverged = true;
    out.result.error = e.what();
  }

  out.final_parameters = params.w;
  if (!out.trajectory.empty()) {
    out.result.final_record = out.trajectory.back();
    auto best = std::min_element(out.trajectory.begin(), out.trajectory.end(),
                                 [](const auto& a, const auto& b) {
                                   return a.val_basic_loss < b.val_basic_loss;
                                 });
    out.result.best_val_basic_loss = best->val_basic_loss;
    out.result.best_step = best->t;
  }
  out.result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

GridResult run_grid_search(const ExperimentConfig& config) {
  config.validate();
  if (config.grid.empty()) throw std::invalid_argument("grid search needs grid.axes or grid.log_ratios");
  const auto points = config.grid.points();

  struct Job {
    std::size_t point;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (auto s : config.seeds) jobs.push_back({p, s});
  }

  GridResult result;
  result.runs = parallel_map<RunOutput>(jobs.size(), config.threads, [&](std::size_t i) {
    ExperimentConfig run_config = config;
    run_config.mode = TrainingMode::kFixed;
    run_config.fixed_weights = points[jobs[i].point];
    return run_training(run_config, jobs[i].seed);
  });

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    GridRow row;
    row.point = jobs[i].point;
    row.raw_weights = points[jobs[i].point];
    row.lambda = LossWeights::normalized(row.raw_weights).values();
    row.seed = jobs[i].seed;
    row.final_val_basic_loss = result.runs[i].result.final_record.val_basic_loss;
    row.diverged = result.runs[i].result.diverged;
    result.rows.push_back(std::move(row));
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < points.size(); ++p) {
    GridPointSummary summary;
    summary.point = p;
    summary.raw_weights = points[p];
    summary.lambda = LossWeights::normalized(points[p]).values();
    std::vector<double> vals;
    for (const auto& row : result.rows) {
      if (row.point == p && !row.diverged) vals.push_back(row.final_val_basic_loss);
    }
    summary.completed_runs = vals.size();
    summary.mean_val_basic_loss =
        vals.empty() ? std::numeric_limits<double>::infinity() : mean(vals);
    summary.std_val_basic_loss = sample_std(vals);
    if (summary.mean_val_basic_loss < best) {
      best = summary.mean_val_basic_loss;
      result.best_point = p;
    }
    result.points.push_back(std::move(summary));
  }
  return result;
}

SeedStudyReport run_seed_study(const ExperimentConfig& config,
                               const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) throw std::invalid_argument("a seed study needs at least two seeds");
  config.validate();
  SeedStudyReport report;
  report.seeds = seeds;
  report.runs = parallel_map<RunOutput>(seeds.size(), config.threads,
                                        [&](std::size_t i) { return run_training(config, seeds[i]); });

  std::vector<double> vals;
  double mu1_min = std::numeric_limits<double>::infinity();
  double mu1_max = -std::numeric_limits<double>::infinity();
  std::size_t n_records = std::numeric_limits<std::size_t>::max();
  for (const auto& run : report.runs) {
    report.final_mu.push_back(run.result.final_record.mu);
    vals.push_back(run.result.final_record.val_basic_loss);
    for (const auto& rec : run.trajectory) {
      mu1_min = std::min(mu1_min, rec.mu[1]);
      mu1_max = std::max(mu1_max, rec.mu[1]);
    }
    n_records = std::min(n_records, run.trajectory.size());
  }
  report.mu1_range = mu1_max - mu1_min;
  report.mean_val_basic_loss = mean(vals);
  report.std_val_basic_loss = sample_std(vals);

  for (std::size_t a = 0; a < seeds.size(); ++a) {
    for (std::size_t b = a + 1; b < seeds.size(); ++b) {
      report.max_pairwise_final_mu_distance = std::max(
          report.max_pairwise_final_mu_distance, distance(report.final_mu[a], report.final_mu[b]));
      report.max_pairwise_final_mu1_distance =
          std::max(report.max_pairwise_final_mu1_distance,
                   std::abs(report.final_mu[a][1] - report.final_mu[b][1]));
    }
  }

  for (std::size_t r = 0; r < n_records; ++r) {
    double spread = 0.0;
    const std::size_t dims = report.runs[0].trajectory[r].mu.size();
    for (std::size_t i = 0; i < dims; ++i) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (const auto& run : report.runs) {
        lo = std::min(lo, run.trajectory[r].mu[i]);
        hi = std::max(hi, run.trajectory[r].mu[i]);
      }
      spread = std::max(spread, hi - lo);
    }
    report.step_spread.push_back(spread);
    report.max_step_spread = std::max(report.max_step_spread, spread);
  }
  return report;
}

std::vector<std::size_t> cluster_endpoints(const std::vector<std::vector<double>>& points,
                                           double threshold,
                                           std::vector<std::vector<double>>* centers) {
  std::vector<std::size_t> founders;
  std::vector<std::size_t> cluster_of(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t c = 0;
    for (; c < founders.size(); ++c) {
      if (distance(points[i], points[founders[c]]) <= threshold) break;
    }
    if (c == founders.size()) founders.push_back(i);
    cluster_of[i] = c;
  }
  if (centers) {
    centers->assign(founders.size(), std::vector<double>());
    std::vector<std::size_t> counts(founders.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& center = (*centers)[cluster_of[i]];
      if (center.empty()) center.assign(points[i].size(), 0.0);
      for (std::size_t k = 0; k < points[i].size(); ++k) center[k] += points[i][k];
      ++counts[cluster_of[i]];
    }
    for (std::size_t c = 0; c < founders.size(); ++c) {
      for (double& x : (*centers)[c]) x /= static_cast<double>(counts[c]);
    }
  }
  return cluster_of;
}

InitSweepReport run_init_sweep(const ExperimentConfig& config,
                               const std::vector<double>& epsilons) {
  if (epsilons.size() < 2) throw std::invalid_argument("an init sweep needs at least two epsilons");
  config.validate();
  InitSweepReport report;
  report.epsilons = epsilons;
  report.threshold = config.cluster_threshold;
  const std::uint64_t seed = config.seeds.front();
  report.runs = parallel_map<RunOutput>(epsilons.size(), config.threads, [&](std::size_t i) {
    ExperimentConfig run_config = config;
    run_config.mode = TrainingMode::kYoto;
    run_config.optimizer.init_epsilon = epsilons[i];
    return run_training(run_config, seed);
  });
  for (const auto& run : report.runs) {
    report.final_mu.push_back(run.result.final_record.mu);
    report.final_lambda.push_back(run.result.final_record.lambda);
  }
  report.cluster_of =
      cluster_endpoints(report.final_lambda, report.threshold, &report.cluster_centers);
  return report;
}

}  // namespace yoto
