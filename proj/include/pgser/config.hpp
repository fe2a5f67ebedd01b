#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "pgser/grid.hpp"
#include "pgser/learner.hpp"

namespace pgser {

struct ScheduleConfig {
  int updates = 0;
  int batch_size = 64;
  double learning_rate = 0.25;
  double rho = 0.5;
  double her_ratio = 0.5;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  TrainVariant variant = TrainVariant::mem;

  GridSpec env_spec;
  int h_max = 50;

  int n_expert = 0;
  int n_random = 0;
  double noise = 0.1;

  ScheduleConfig pretrain;
  ScheduleConfig train;
  LearnerKind train_kind = LearnerKind::dataset_constrained;
  bool warm_start = false;

  std::size_t buffer_capacity = 0;  // 0 resolves to 10x dataset transitions
  double buffer_alpha = 1.0;
  double buffer_eps = 1e-3;

  int eval_episodes = 50;
  std::vector<std::uint64_t> eval_seeds;

  std::size_t analysis_samples_per_class = 2000;
  int analysis_bins = 40;
  bool analysis_unreachable_only = false;
};

/// Reads a flat-key JSON config ("env.width", "train.updates", ...),
/// applies defaults for optional keys and validates everything. Unknown keys
/// and malformed values raise ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical flat-key form; parse_config(config_to_json(c)) round-trips.
nlohmann::json config_to_json(const ExperimentConfig& c);

void validate_config(const ExperimentConfig& c);

/// Content hash of the canonical form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// Effective priority-buffer capacity: the configured one, or 10x the
/// dataset transition count when the config leaves it at 0.
std::size_t resolve_buffer_capacity(const ExperimentConfig& c,
                                    std::size_t dataset_transitions);

}  // namespace pgser
