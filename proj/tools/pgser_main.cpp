// Command-line front end for the offline goal-conditioned learning pipeline.
// Subcommands mirror the pipeline stages; `pipeline` chains all of them.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "pgser/errors.hpp"
#include "pgser/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::int64_t seed = -1;  // negative means "keep the config's seed"
  std::string out_dir;
  int jobs = 1;
};

pgser::ExperimentConfig load(const CommonArgs& args) {
  pgser::ExperimentConfig cfg = pgser::load_config(args.config_path);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  pgser::validate_config(cfg);
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", args.seed, "Override the config's master seed");
  cmd->add_option("--out", args.out_dir, "Override the output directory");
  cmd->add_option("--jobs", args.jobs, "Parallel training jobs")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline goal-conditioned learning laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string command;
  for (const auto& name :
       {"gen-data", "pretrain", "fill-buffer", "train", "evaluate", "qhist",
        "classify", "pipeline"}) {
    CLI::App* cmd = app.add_subcommand(name, "");
    add_common(cmd, args);
    cmd->callback([&command, name] { command = name; });
  }
  app.get_subcommand("gen-data")->description("Generate the offline dataset");
  app.get_subcommand("pretrain")
      ->description("Pre-train the Q-table with random goal swapping");
  app.get_subcommand("fill-buffer")
      ->description("Fill the prioritized augmentation buffer");
  app.get_subcommand("train")
      ->description("Train the configured variant across the eval seeds");
  app.get_subcommand("evaluate")
      ->description("Evaluate trained tables for the configured variant");
  app.get_subcommand("qhist")
      ->description("Histogram Q-values of original vs swapped transitions");
  app.get_subcommand("classify")
      ->description("Fit reachability classifiers on labeled Q-values");
  app.get_subcommand("pipeline")->description("Run every stage end to end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const pgser::ExperimentConfig cfg = load(args);
    std::ostream* log = &std::cout;
    if (command == "gen-data") {
      pgser::run_gen_data(cfg, log);
    } else if (command == "pretrain") {
      pgser::run_pretrain(cfg, log);
    } else if (command == "fill-buffer") {
      pgser::run_fill_buffer(cfg, log);
    } else if (command == "train") {
      pgser::run_train(cfg, args.jobs, log);
    } else if (command == "evaluate") {
      pgser::run_evaluate(cfg, cfg.variant, log);
    } else if (command == "qhist") {
      pgser::run_qhist(cfg, log);
    } else if (command == "classify") {
      pgser::run_classify(cfg, log);
    } else if (command == "pipeline") {
      pgser::run_pipeline(cfg, args.jobs, log);
    }
  } catch (const pgser::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pgser::MissingArtifactError& e) {
    std::cerr << "missing artifact: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
