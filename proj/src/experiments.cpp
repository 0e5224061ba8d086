#include "yoto/experiments.hpp"

#include <string>

#include "yoto/harness.hpp"
#include "yoto/models.hpp"

namespace yoto {

namespace {

using nlohmann::json;

const char* extension(ExportFormat f) { return f == ExportFormat::kJson ? ".json" : ".csv"; }

// Writes one trajectory per requested format; returns paths relative to the
// output directory.
json write_trajectories(const RunOutput& run, std::size_t loss_count, const OutputOptions& out,
                        const std::filesystem::path& rel_stem) {
  json files = json::array();
  for (ExportFormat f : out.formats) {
    auto rel = rel_stem;
    rel += extension(f);
    export_trajectory(run.trajectory, loss_count, f, out.dir / rel);
    files.push_back(rel.generic_string());
  }
  return files;
}

json config_json(const ExperimentConfig& config) {
  json j = json::object();
  for (const auto& [k, v] : to_entries(config)) j[k] = v;
  return j;
}

ExperimentOutcome finish(json summary, const std::filesystem::path& dir, const std::string& name,
                         bool diverged) {
  summary["diverged"] = diverged;
  write_json(summary, dir / name / "summary.json");
  return {std::move(summary), diverged};
}

}  // namespace

ExperimentOutcome train_experiment(const ExperimentConfig& config, const OutputOptions& out) {
  json summary;
  summary["experiment"] = "train";
  summary["config"] = config_json(config);
  summary["runs"] = json::array();
  bool diverged = false;
  for (auto seed : config.seeds) {
    const RunOutput run = run_training(config, seed);
    json entry = to_json(run.result);
    entry["trajectory_files"] = write_trajectories(
        run, config.model.loss_count(), out,
        std::filesystem::path("train") / ("trajectory_seed" + std::to_string(seed)));
    summary["runs"].push_back(std::move(entry));
    diverged = diverged || run.result.diverged;
  }
  return finish(std::move(summary), out.dir, "train", diverged);
}

ExperimentOutcome grid_experiment(const ExperimentConfig& config, const OutputOptions& out) {
  const GridResult grid = run_grid_search(config);
  json summary;
  summary["experiment"] = "grid";
  summary["config"] = config_json(config);
  summary["grid"] = to_json(grid);
  bool diverged = false;
  json files = json::array();
  for (std::size_t i = 0; i < grid.rows.size(); ++i) {
    const auto& row = grid.rows[i];
    files.push_back(write_trajectories(
        grid.runs[i], config.model.loss_count(), out,
        std::filesystem::path("grid") /
            ("point" + std::to_string(row.point) + "_seed" + std::to_string(row.seed))));
    diverged = diverged || row.diverged;
  }
  summary["trajectory_files"] = files;
  return finish(std::move(summary), out.dir, "grid", diverged);
}

ExperimentOutcome seed_study_experiment(const ExperimentConfig& config, const OutputOptions& out) {
  ExperimentConfig yoto_config = config;
  yoto_config.mode = TrainingMode::kYoto;
  const SeedStudyReport report = run_seed_study(yoto_config, config.seeds);
  json summary;
  summary["experiment"] = "seed-study";
  summary["config"] = config_json(yoto_config);
  summary["report"] = to_json(report);
  bool diverged = false;
  json files = json::array();
  for (const auto& run : report.runs) {
    files.push_back(write_trajectories(
        run, config.model.loss_count(), out,
        std::filesystem::path("seed-study") / ("trajectory_seed" + std::to_string(run.result.seed))));
    diverged = diverged || run.result.diverged;
  }
  summary["trajectory_files"] = files;
  return finish(std::move(summary), out.dir, "seed-study", diverged);
}

ExperimentOutcome init_sweep_experiment(const ExperimentConfig& config, const OutputOptions& out) {
  const InitSweepReport report = run_init_sweep(config, config.init_epsilons);
  json summary;
  summary["experiment"] = "init-sweep";
  summary["config"] = config_json(config);
  summary["report"] = to_json(report);
  bool diverged = false;
  json files = json::array();
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    files.push_back(write_trajectories(report.runs[i], config.model.loss_count(), out,
                                       std::filesystem::path("init-sweep") /
                                           ("trajectory_eps" + std::to_string(i))));
    diverged = diverged || report.runs[i].result.diverged;
  }
  summary["trajectory_files"] = files;
  return finish(std::move(summary), out.dir, "init-sweep", diverged);
}

nlohmann::json GradCheckSuiteResult::to_json() const {
  json j;
  j["pass"] = pass;
  j["reports"] = json::array();
  for (const auto& r : reports) j["reports"].push_back(json::parse(r.to_json()));
  return j;
}

GradCheckSuiteResult run_gradcheck_suite(const GradCheckSuite& suite) {
  GradCheckSuiteResult result;
  result.reports.push_back(check_hp_gradients(suite.hp));
  result.reports.push_back(check_reg_gradients(suite.hp));
  for (ModelKind kind : {ModelKind::kLinearRegression, ModelKind::kTinyMlp}) {
    ToyModelSpec spec;
    spec.kind = kind;
    result.reports.push_back(check_model_gradients(*make_model(spec), suite.model));
  }
  for (const auto& r : result.reports) result.pass = result.pass && r.pass;
  return result;
}

}  // namespace yoto
