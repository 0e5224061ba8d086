// yoto: gradient checks and YOTO / grid-search experiments on toy models.
//
// Exit codes: 0 success, 1 failed gradient check or runtime error, 2 usage,
// 3 configuration error, 4 diverged training (partial outputs written).

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "yoto/config.hpp"
#include "yoto/errors.hpp"
#include "yoto/experiments.hpp"
#include "yoto/export.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitDiverged = 4;

constexpr const char* kOutputEnv = "YOTO_OUTPUT_DIR";

int report_error(const char* kind, int code, const std::string& message) {
  nlohmann::json line{{"error", kind}, {"exit_code", code}, {"message", message}};
  std::cerr << line.dump() << '\n';
  return code;
}

struct ExperimentArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string format = "csv";
};

void add_experiment_flags(CLI::App* sub, ExperimentArgs& args) {
  sub->add_option("-c,--config", args.config_path, "Experiment config file")->required();
  sub->add_option("--override", args.overrides, "key=value; may repeat, last wins");
  sub->add_option("-o,--out", args.out_dir, "Output directory");
  sub->add_option("--format", args.format, "Trajectory format")
      ->check(CLI::IsMember({"csv", "json", "both"}));
}

// --out, then output_dir from the config, then $YOTO_OUTPUT_DIR.
yoto::OutputOptions output_options(const ExperimentArgs& args, const yoto::ConfigEntries& entries,
                                   const yoto::ExperimentConfig& config) {
  yoto::OutputOptions out;
  if (!args.out_dir.empty()) {
    out.dir = args.out_dir;
  } else if (entries.count("output_dir")) {
    out.dir = config.output_dir;
  } else if (const char* env = std::getenv(kOutputEnv); env && *env) {
    out.dir = env;
  } else {
    out.dir = config.output_dir;
  }
  if (args.format == "json") out.formats = {yoto::ExportFormat::kJson};
  if (args.format == "both") out.formats = {yoto::ExportFormat::kCsv, yoto::ExportFormat::kJson};
  return out;
}

template <typename Driver>
int run_experiment(const ExperimentArgs& args, Driver&& driver, bool verbose) {
  yoto::ConfigEntries entries;
  yoto::ExperimentConfig config;
  try {
    entries = yoto::load_config_entries(args.config_path);
    for (const auto& o : args.overrides) yoto::apply_override(entries, o);
    config = yoto::build_config(entries);
  } catch (const yoto::ConfigError& e) {
    return report_error("config", kExitConfig, e.what());
  }
  const yoto::OutputOptions out = output_options(args, entries, config);
  if (verbose) std::cerr << "writing outputs below " << out.dir << '\n';
  const yoto::ExperimentOutcome outcome = driver(config, out);
  std::cout << outcome.summary.dump(2) << '\n';
  if (outcome.diverged) {
    return report_error("diverged", kExitDiverged, "training diverged; partial outputs written");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"YOTO loss-weight optimization experiments"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

  yoto::GradCheckSuite suite;
  std::string gradcheck_out;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference checks of all analytic gradients");
  gradcheck->add_option("--trials", suite.hp.n_trials, "Random instances for HP checks")
      ->capture_default_str();
  gradcheck->add_option("--tol", suite.hp.tolerance, "Relative tolerance for HP checks")
      ->capture_default_str();
  gradcheck->add_option("--model-trials", suite.model.n_trials, "Random instances per model")
      ->capture_default_str();
  gradcheck->add_option("--model-tol", suite.model.tolerance, "Relative tolerance for models")
      ->capture_default_str();
  gradcheck->add_option("--seed", suite.hp.seed, "Check seed")->capture_default_str();
  gradcheck->add_option("-o,--out", gradcheck_out, "Also write the report to this JSON file");

  ExperimentArgs train_args, grid_args, seed_args, sweep_args;
  add_experiment_flags(app.add_subcommand("train", "Train once per configured seed"), train_args);
  add_experiment_flags(app.add_subcommand("grid", "Fixed-weight grid search"), grid_args);
  add_experiment_flags(app.add_subcommand("seed-study", "YOTO stability across seeds"), seed_args);
  add_experiment_flags(app.add_subcommand("init-sweep", "YOTO runs over init epsilons"), sweep_args);

  std::string export_input, export_output, export_format = "json";
  auto* export_cmd = app.add_subcommand("export", "Convert a trajectory file between CSV and JSON");
  export_cmd->add_option("-i,--input", export_input, "Trajectory file (CSV or JSON)")->required();
  export_cmd->add_option("-o,--output", export_output, "Destination file")->required();
  export_cmd->add_option("--format", export_format, "Destination format")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << '\n';
    return report_error("usage", kExitUsage, e.what());
  }

  try {
    if (gradcheck->parsed()) {
      suite.model.seed = suite.hp.seed;
      const auto result = yoto::run_gradcheck_suite(suite);
      const auto doc = result.to_json();
      std::cout << doc.dump(2) << '\n';
      if (!gradcheck_out.empty()) yoto::write_json(doc, gradcheck_out);
      return result.pass ? kExitOk : kExitFailure;
    }
    if (app.got_subcommand("train")) return run_experiment(train_args, yoto::train_experiment, verbose);
    if (app.got_subcommand("grid")) return run_experiment(grid_args, yoto::grid_experiment, verbose);
    if (app.got_subcommand("seed-study")) {
      return run_experiment(seed_args, yoto::seed_study_experiment, verbose);
    }
    if (app.got_subcommand("init-sweep")) {
      return run_experiment(sweep_args, yoto::init_sweep_experiment, verbose);
    }
    if (export_cmd->parsed()) {
      const auto file = yoto::import_trajectory_file(export_input);
      yoto::export_trajectory(file.records, file.loss_count,
                              yoto::parse_export_format(export_format), export_output);
      return kExitOk;
    }
  } catch (const yoto::ConfigError& e) {
    return report_error("config", kExitConfig, e.what());
  } catch (const std::invalid_argument& e) {
    return report_error("config", kExitConfig, e.what());
  } catch (const std::exception& e) {
    return report_error("runtime", kExitFailure, e.what());
  }
  return kExitUsage;
}
