#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgser/qtable.hpp"
#include "pgser/replay.hpp"

namespace pgser {

/// Which (state, action) pairs the dataset actually contains; the
/// dataset_constrained backup bootstraps only through these.
class DatasetActionMask {
 public:
  static DatasetActionMask from_buffer(const GCEnvironment& env,
                                       const UniformBuffer& buffer);

  bool observed(StateId s, ActionId a) const {
    return mask_[static_cast<std::size_t>(s) * num_actions_ + a] != 0;
  }
  bool any_action(StateId s) const { return any_[s] != 0; }

 private:
  int num_actions_ = 0;
  std::vector<char> mask_;
  std::vector<char> any_;
};

/// One-step backup target. Every step costs one: a state already achieving
/// the goal is worth 0, arrival at the goal is worth -1, and everything else
/// bootstraps through the next state, clipped to the [-h_max, 0] range. With
/// a mask, the bootstrap maximizes only over observed actions and treats
/// next states with no observed action as worth -h_max. The stored done flag
/// is ignored, so budget timeouts do not poison the bootstrap.
double bellman_target(const QTable& q, const GCEnvironment& env,
                      const GCTransition& t, const DatasetActionMask* mask);

/// Moves the entry toward the target by lr and clips it back into range.
void bellman_update(QTable& q, const GCEnvironment& env, const GCTransition& t,
                    double lr, const DatasetActionMask* mask = nullptr);

struct TrainSchedule {
  int updates = 0;
  int batch_size = 1;
  double learning_rate = 0.25;
  double rho = 0.5;
  double her_ratio = 0.5;
  std::uint64_t rng_seed = 0;
  LearnerKind kind = LearnerKind::dataset_constrained;
  bool warm_start = false;
};

enum class TrainVariant { baseline, swap, mem };

TrainVariant parse_train_variant(const std::string& name);
std::string to_string(TrainVariant v);

struct TrainResult {
  QTable q;
  SampleStats stats;
};

/// Offline training loop. baseline samples the dataset only, swap mixes in
/// fresh random goal swaps, mem mixes in priority-buffer draws. mem requires
/// a filled priority buffer and warm starts require a pretrained table.
TrainResult train_agent(const GCEnvironment& env, const UniformBuffer& beta,
                        const GoalPool& pool, const TrainSchedule& schedule,
                        TrainVariant variant,
                        const PrioritizedBuffer* beta_aug = nullptr,
                        const QTable* pretrained = nullptr);

/// Pre-training pass: swap-style mixing with the dataset_constrained backup,
/// always from scratch. The result is the frozen table that scores
/// augmentation priorities.
QTable pretrain_q(const GCEnvironment& env, const UniformBuffer& beta,
                  const GoalPool& pool, const TrainSchedule& schedule);

/// Fills a priority buffer with random goal swaps scored by the frozen
/// pretrained table.
PrioritizedBuffer fill_priority_buffer(const QTable& frozen,
                                       const GCEnvironment& env,
                                       const UniformBuffer& beta,
                                       const GoalPool& pool,
                                       std::size_t capacity, double alpha,
                                       double eps, RngStream& rng);

/// Deterministic greedy play on a table.
struct GreedyPolicy {
  const QTable* q = nullptr;
  ActionId operator()(StateId s, GoalId g) const {
    return q->greedy_action(s, g);
  }
};

}  // namespace pgser
