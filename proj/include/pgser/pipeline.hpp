#pragma once

#include <filesystem>
#include <iosfwd>

#include "pgser/analysis.hpp"
#include "pgser/config.hpp"

namespace pgser {

// Artifact locations inside an experiment's output directory.
std::filesystem::path dataset_path(const ExperimentConfig& c);
std::filesystem::path pretrained_path(const ExperimentConfig& c);
std::filesystem::path buffer_path(const ExperimentConfig& c);
std::filesystem::path qtable_path(const ExperimentConfig& c, TrainVariant v,
                                  std::uint64_t run_seed);
std::filesystem::path eval_report_path(const ExperimentConfig& c,
                                       TrainVariant v);
std::filesystem::path significance_path(const ExperimentConfig& c);
std::filesystem::path qhist_path(const ExperimentConfig& c);
std::filesystem::path classify_path(const ExperimentConfig& c);
std::filesystem::path run_manifest_path(const ExperimentConfig& c);

struct StageOutcome {
  std::filesystem::path path;  // primary output artifact
  bool cached = false;
  double seconds = 0.0;
};

/// Stages are individually re-runnable and cache their outputs: when the
/// stage's config subset and input artifact hashes match the stored
/// manifest and the outputs exist, the stage is skipped. Outputs are
/// written atomically, so a failed stage never leaves partial artifacts.
StageOutcome run_gen_data(const ExperimentConfig& c,
                          std::ostream* log = nullptr);
StageOutcome run_pretrain(const ExperimentConfig& c,
                          std::ostream* log = nullptr);
StageOutcome run_fill_buffer(const ExperimentConfig& c,
                             std::ostream* log = nullptr);
StageOutcome run_train_one(const ExperimentConfig& c, TrainVariant v,
                           std::uint64_t run_seed, std::ostream* log = nullptr);
/// The config's variant across all eval seeds, jobs tasks at a time.
void run_train(const ExperimentConfig& c, int jobs, std::ostream* log = nullptr);
StageOutcome run_evaluate(const ExperimentConfig& c, TrainVariant v,
                          std::ostream* log = nullptr);
StageOutcome run_compare(const ExperimentConfig& c,
                         std::ostream* log = nullptr);
StageOutcome run_qhist(const ExperimentConfig& c, std::ostream* log = nullptr);
StageOutcome run_classify(const ExperimentConfig& c,
                          std::ostream* log = nullptr);

/// The whole chain: gen-data, pretrain, fill-buffer, train for every
/// variant and seed (jobs at a time), per-variant evaluation and the final
/// significance table, plus a run manifest listing every artifact.
void run_pipeline(const ExperimentConfig& c, int jobs,
                  std::ostream* log = nullptr);

}  // namespace pgser
