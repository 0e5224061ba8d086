// Acceptance checks for the yoto library. Prints one PASS/FAIL line per
// criterion and exits non-zero if any criterion fails.
//
// usage: yoto_acceptance --config configs/helpful_harmful.cfg

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "yoto/config.hpp"
#include "yoto/gradcheck.hpp"
#include "yoto/harness.hpp"
#include "yoto/loss_layer.hpp"
#include "yoto/models.hpp"
#include "yoto/optimizers.hpp"

namespace {

// Pinned tolerances.
constexpr double kHpTol = 1e-6;            // HP and regularizer gradient checks
constexpr double kModelTol = 1e-5;         // model gradient checks
constexpr double kHandPointTol = 1e-9;     // FD of the regularizer at mu = (0, 0)
constexpr double kYotoVsGridRatio = 1.02;  // YOTO mean val loss vs best grid point
constexpr double kMu1SpreadFraction = 0.10;
constexpr std::size_t kMaxClusters = 2;
constexpr std::size_t kMinEpsilons = 5;
constexpr double kSymmetryTol = 1e-10;
constexpr std::int64_t kConformanceSteps = 5000;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  std::printf("%s criterion %d %s: %s (%.2fs)\n", out.pass ? "PASS" : "FAIL", id, name,
              out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome normalization_table() {
  struct Row {
    double a, b, l0, l1, l2;
  };
  const Row rows[] = {
      {0.01, 0.01, 0.9804, 0.0098, 0.0098}, {0.01, 0.1, 0.9009, 0.0090, 0.0901},
      {0.01, 1.0, 0.4975, 0.0050, 0.4975},  {0.25, 0.01, 0.7937, 0.1984, 0.0079},
      {0.25, 0.1, 0.7407, 0.1852, 0.0741},  {0.25, 1.0, 0.4444, 0.1111, 0.4444},
      {1.0, 0.01, 0.4975, 0.4975, 0.0050},  {1.0, 0.1, 0.4762, 0.4762, 0.0476},
      {1.0, 1.0, 0.3333, 0.3333, 0.3333},
  };
  // Printed values are rounded to four decimals; compare after rounding.
  auto round4 = [](double x) { return std::round(x * 1e4) / 1e4; };
  int matched = 0;
  double worst = 0.0;
  for (const auto& r : rows) {
    const auto w = yoto::softmax_weights(yoto::HPExponents({0.0, std::log(r.a), std::log(r.b)}));
    const double want[] = {r.l0, r.l1, r.l2};
    bool row_ok = true;
    for (std::size_t i = 0; i < 3; ++i) {
      row_ok = row_ok && std::abs(round4(w[i]) - want[i]) < 1e-12;
      worst = std::max(worst, std::abs(w[i] - want[i]));
    }
    matched += row_ok;
  }
  return {matched == 9,
          fmt("%.0f/9 triples equal after rounding to 4 decimals (max raw diff %.2e)", matched,
              worst)};
}

Outcome hp_gradient_oracle() {
  yoto::HpCheckOptions o;
  o.tolerance = kHpTol;
  const auto r = yoto::check_hp_gradients(o);
  return {r.pass && r.n_trials == 100,
          fmt("100 trials K in 1..5, max rel err %.2e < %.0e", r.max_relative_error, kHpTol)};
}

Outcome reg_gradient_oracle() {
  yoto::HpCheckOptions o;
  o.tolerance = kHpTol;
  const auto r = yoto::check_reg_gradients(o);
  const auto analytic = yoto::regularizer_gradient(yoto::HPExponents({0.0, 0.0}));
  const auto fd = yoto::central_fd(
      [](std::span<const double> a) {
        return yoto::regularizer_value(yoto::HPExponents::from_auxiliary(a), 1.0);
      },
      std::vector<double>{0.0}, yoto::kDefaultFdStep);
  const bool hand = analytic[0] == 0.0 && analytic[1] == 0.5 &&
                    std::abs(fd[0] - 0.5) < kHandPointTol;
  return {r.pass && hand,
          fmt("max rel err %.2e < %.0e; mu=(0,0) analytic (0,%.3g)", r.max_relative_error,
              kHpTol, analytic[1]) +
              fmt(", fd %.10f", fd[0])};
}

Outcome degeneracy() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_k(1, 5);
  bool naive_positive = true;
  int negative = 0;
  int positive = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = pick_k(rng);
    std::vector<double> mu(k + 1, 0.0);
    std::vector<double> l(k + 1);
    for (std::size_t i = 1; i <= k; ++i) mu[i] = 2.0 * normal(rng);
    for (double& x : l) x = std::abs(normal(rng)) + 1e-3;
    const yoto::HPExponents hp(mu);
    for (double g : yoto::naive_exp_gradient(hp, l)) naive_positive = naive_positive && g > 0.0;
    const auto h = yoto::hp_gradient_empirical(hp, l);
    for (std::size_t i = 1; i <= k; ++i) {
      negative += h[i] < 0.0;
      positive += h[i] > 0.0;
    }
  }
  std::ostringstream s;
  s << "naive all > 0: " << (naive_positive ? "yes" : "no") << "; empirical entries " << negative
    << " negative, " << positive << " positive";
  return {naive_positive && negative > 0 && positive > 0, s.str()};
}

Outcome model_gradient_oracle() {
  bool pass = true;
  std::ostringstream s;
  for (auto kind : {yoto::ModelKind::kLinearRegression, yoto::ModelKind::kTinyMlp}) {
    yoto::ToyModelSpec spec;
    spec.kind = kind;
    yoto::ModelCheckOptions o;
    o.tolerance = kModelTol;
    const auto r = yoto::check_model_gradients(*yoto::make_model(spec), o);
    pass = pass && r.pass && r.n_trials == 50;
    s << yoto::to_string(kind) << " " << fmt("%.2e", r.max_relative_error) << "; ";
  }
  s << "tol " << kModelTol << ", 50 trials each";
  return {pass, s.str()};
}

Outcome algorithm_conformance(const yoto::ExperimentConfig& base) {
  yoto::OptimizerConfig c;
  c.alpha = 0.1;
  c.beta1 = 0.0;
  c.hp_decay = 0.0;
  c.schedule.kind = yoto::ScheduleKind::kConstant;
  const std::vector<double> zero_h{0.0, 0.0};
  const auto hps = yoto::init_hp_state(1, 1.0);

  // w=1, g=2, plain step.
  const auto [a, ah] = yoto::sgdw_yoto_step(yoto::ParamState({1.0}), hps,
                                            std::vector<double>{2.0}, zero_h, 1, c);
  const bool ex1 = a.w[0] == 1.0 - 0.1 * 2.0;
  // Zero gradients: fixed point.
  const auto [b, bh] = yoto::sgdw_yoto_step(yoto::ParamState({1.0}), hps,
                                            std::vector<double>{0.0}, zero_h, 1, c);
  const bool ex2 = b.w[0] == 1.0 && b.m[0] == 0.0 && bh.n[1] == 0.0 && bh.mu[1] == hps.mu[1];
  // Momentum: prior m=1, g=1, beta1=0.9, alpha=0.1 gives m'=1.
  c.beta1 = 0.9;
  yoto::ParamState p3({5.0});
  p3.m = {1.0};
  const auto [m3, mh] = yoto::sgdw_yoto_step(p3, hps, std::vector<double>{1.0}, zero_h, 1, c);
  const bool ex3 = m3.m[0] == 0.9 * 1.0 + 0.1 * 1.0 && m3.w[0] == 5.0 - m3.m[0];

  // Full-length loop on the configured task, watching mu_0 and n_0.
  auto cfg = base;
  cfg.steps = kConformanceSteps;
  cfg.optimizer.total_steps = kConformanceSteps;
  const auto task = yoto::make_synthetic_dataset(cfg.model, cfg.data_seed, cfg.n_train, 1);
  const auto model = yoto::make_model(cfg.model);
  std::mt19937_64 rng(0);
  yoto::ParamState params(model->init_parameters(rng));
  yoto::HPState hp = yoto::init_hp_state(cfg.model.loss_count() - 1, cfg.optimizer.init_epsilon);
  std::vector<std::size_t> order(task.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  bool frozen = true;
  for (std::int64_t t = 1; t <= kConformanceSteps; ++t) {
    const std::size_t start = ((t - 1) * cfg.batch_size) % order.size();
    if (start == 0) std::shuffle(order.begin(), order.end(), rng);
    const std::size_t len = std::min(cfg.batch_size, order.size() - start);
    const yoto::BatchView batch(task.train, std::span<const std::size_t>(order).subspan(start, len));
    const auto lambda = yoto::softmax_weights(hp.mu);
    const auto losses = model->eval_losses(params.w, batch);
    const auto g = model->eval_param_gradient(params.w, batch, lambda);
    const auto h = yoto::hp_gradient_empirical(hp.mu, losses.values);
    std::tie(params, hp) = yoto::yoto_step(params, hp, g, h, t, cfg.optimizer);
    frozen = frozen && hp.mu[0] == 0.0 && hp.n[0] == 0.0;
  }
  // The harness loop over the same budget.
  const auto run = yoto::run_training(cfg, 0);
  bool harness_frozen = !run.result.diverged;
  for (const auto& r : run.trajectory) harness_frozen = harness_frozen && r.mu[0] == 0.0;

  std::ostringstream s;
  s << "hand steps " << ex1 << ex2 << ex3 << "; mu_0 = n_0 = 0 over " << kConformanceSteps
    << " steps: " << (frozen ? "yes" : "no") << "; harness mu_0 = 0 at all "
    << run.trajectory.size() << " records: " << (harness_frozen ? "yes" : "no");
  return {ex1 && ex2 && ex3 && frozen && harness_frozen, s.str()};
}

struct ProtocolResults {
  yoto::GridResult grid;
  yoto::SeedStudyReport study;
};

ProtocolResults run_protocol(const yoto::ExperimentConfig& config) {
  ProtocolResults out;
  auto grid_cfg = config;
  grid_cfg.grid.axes = {{0.01, 0.25, 1.0}, {0.01, 0.1, 1.0}};
  grid_cfg.grid.log_ratios.clear();
  grid_cfg.seeds = {0, 1, 2};
  out.grid = yoto::run_grid_search(grid_cfg);
  auto yoto_cfg = grid_cfg;
  yoto_cfg.mode = yoto::TrainingMode::kYoto;
  out.study = yoto::run_seed_study(yoto_cfg, yoto_cfg.seeds);
  return out;
}

Outcome yoto_vs_grid(const ProtocolResults& p) {
  const auto& best = p.grid.points[p.grid.best_point];
  bool diverged = false;
  for (const auto& r : p.grid.rows) diverged = diverged || r.diverged;
  bool helpful_wins = true;
  std::ostringstream lam;
  for (const auto& run : p.study.runs) {
    const auto& l = run.result.final_record.lambda;
    diverged = diverged || run.result.diverged;
    helpful_wins = helpful_wins && l[1] > l[2];
    lam << " (" << fmt("%.3f,%.3f,%.2e", l[0], l[1], l[2]) << ")";
  }
  const double ratio = p.study.mean_val_basic_loss / best.mean_val_basic_loss;
  std::ostringstream s;
  s << "best grid (" << best.raw_weights[1] << "," << best.raw_weights[2] << ") "
    << fmt("%.6f; YOTO %.6f; ratio %.4f", best.mean_val_basic_loss, p.study.mean_val_basic_loss,
           ratio)
    << " <= " << kYotoVsGridRatio << "; final lambda" << lam.str();
  return {!diverged && ratio <= kYotoVsGridRatio && helpful_wins, s.str()};
}

Outcome seed_stability(const ProtocolResults& p) {
  const auto& best = p.grid.points[p.grid.best_point];
  const double frac = p.study.max_pairwise_final_mu1_distance / p.study.mu1_range;
  const bool spread_ok = p.study.mu1_range > 0.0 && frac < kMu1SpreadFraction;
  const bool std_ok = p.study.std_val_basic_loss <= best.std_val_basic_loss;
  std::ostringstream s;
  s << fmt("mu_1 spread %.3e of range %.3f (%.4f", p.study.max_pairwise_final_mu1_distance,
           p.study.mu1_range, frac)
    << " < " << kMu1SpreadFraction << "); "
    << fmt("val std YOTO %.3e vs best grid %.3e", p.study.std_val_basic_loss,
           best.std_val_basic_loss);
  return {spread_ok && std_ok, s.str()};
}

bool log_spaced(const std::vector<double>& eps) {
  if (eps.size() < 2) return false;
  const double step = std::log10(eps[1] / eps[0]);
  if (!(step > 0.0)) return false;
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (std::abs(std::log10(eps[i] / eps[i - 1]) - step) > 0.01) return false;
  }
  return true;
}

Outcome init_sweep(const yoto::ExperimentConfig& config) {
  const auto& eps = config.init_epsilons;
  const auto sweep = yoto::run_init_sweep(config, eps);
  std::size_t clusters = sweep.cluster_centers.size();
  // Repeat the first and last epsilon with the same seed.
  const auto again = yoto::run_init_sweep(config, {eps.front(), eps.back()});
  const bool repeatable = again.final_mu[0] == sweep.final_mu.front() &&
                          again.final_mu[1] == sweep.final_mu.back();
  std::ostringstream s;
  s << eps.size() << " epsilons " << eps.front() << ".." << eps.back()
    << (log_spaced(eps) ? " log-spaced" : " NOT log-spaced") << "; " << clusters
    << " cluster(s) of final lambda at threshold " << sweep.threshold << " (<= " << kMaxClusters
    << "); repeat endpoints identical: " << (repeatable ? "yes" : "no");
  return {eps.size() >= kMinEpsilons && log_spaced(eps) && clusters <= kMaxClusters && repeatable,
          s.str()};
}

Outcome symmetry(const yoto::ExperimentConfig& config) {
  auto cfg = config;
  cfg.model.aux_terms = {yoto::AuxTerm::kConsistency, yoto::AuxTerm::kConsistency,
                         yoto::AuxTerm::kNoiseFit};
  cfg.mode = yoto::TrainingMode::kYoto;
  cfg.grid = {};
  const auto run = yoto::run_training(cfg, 0);
  double worst = 0.0;
  for (const auto& r : run.trajectory) worst = std::max(worst, std::abs(r.mu[1] - r.mu[2]));
  std::ostringstream s;
  s << run.trajectory.size() << " records, max |mu_1 - mu_2| " << fmt("%.2e", worst)
    << " <= " << kSymmetryTol;
  return {!run.result.diverged && worst <= kSymmetryTol, s.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::string config_path = "configs/helpful_harmful.cfg";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      config_path = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--config FILE]\n", argv[0]);
      return 2;
    }
  }
  yoto::ExperimentConfig config;
  try {
    config = yoto::load_config(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot load %s: %s\n", config_path.c_str(), e.what());
    return 2;
  }

  report(1, "normalization exactness", normalization_table);
  report(2, "HP gradient oracle", hp_gradient_oracle);
  report(3, "regularizer gradient oracle", reg_gradient_oracle);
  report(4, "degeneracy demonstration", degeneracy);
  report(5, "model gradient oracle", model_gradient_oracle);
  report(6, "optimizer conformance", [&] { return algorithm_conformance(config); });

  ProtocolResults protocol;
  bool protocol_ok = true;
  std::string protocol_error;
  const auto start = std::chrono::steady_clock::now();
  try {
    protocol = run_protocol(config);
  } catch (const std::exception& e) {
    protocol_ok = false;
    protocol_error = e.what();
  }
  const double protocol_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("# protocol runs (27 grid + 3 YOTO) took %.2fs\n", protocol_secs);
  auto guarded = [&](Outcome (*f)(const ProtocolResults&)) {
    return [&, f]() -> Outcome {
      if (!protocol_ok) return {false, "protocol failed: " + protocol_error};
      return f(protocol);
    };
  };
  report(7, "YOTO vs grid", guarded(yoto_vs_grid));
  report(8, "seed stability", guarded(seed_stability));
  report(9, "init-sweep basins", [&] { return init_sweep(config); });
  report(10, "duplicate-term symmetry", [&] { return symmetry(config); });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
