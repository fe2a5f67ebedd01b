#include "pgser/learner.hpp"

#include <algorithm>

#include "pgser/errors.hpp"

namespace pgser {

DatasetActionMask DatasetActionMask::from_buffer(const GCEnvironment& env,
                                                 const UniformBuffer& buffer) {
  DatasetActionMask m;
  m.num_actions_ = env.num_actions();
  m.mask_.assign(
      static_cast<std::size_t>(env.num_states()) * env.num_actions(), 0);
  m.any_.assign(env.num_states(), 0);
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const GCTransition& t = buffer[i];
    m.mask_[static_cast<std::size_t>(t.state) * m.num_actions_ + t.action] = 1;
    m.any_[t.state] = 1;
  }
  return m;
}

double bellman_target(const QTable& q, const GCEnvironment& env,
                      const GCTransition& t, const DatasetActionMask* mask) {
  const double floor = -static_cast<double>(q.h_max());
  if (is_terminal(env, t.state, t.goal)) return 0.0;
  if (is_terminal(env, t.next_state, t.goal)) return -1.0;
  double cont;
  if (mask) {
    cont = floor;
    if (mask->any_action(t.next_state))
      for (ActionId a = 0; a < env.num_actions(); ++a)
        if (mask->observed(t.next_state, a))
          cont = std::max(cont, q.at(t.next_state, t.goal, a));
  } else {
    cont = q.state_value(t.next_state, t.goal);
  }
  return std::max(floor, -1.0 + cont);
}

void bellman_update(QTable& q, const GCEnvironment& env, const GCTransition& t,
                    double lr, const DatasetActionMask* mask) {
  const double target = bellman_target(q, env, t, mask);
  double& v = q.entry(t.state, t.goal, t.action);
  v += lr * (target - v);
  v = std::clamp(v, -static_cast<double>(q.h_max()), 0.0);
}

TrainVariant parse_train_variant(const std::string& name) {
  if (name == "baseline") return TrainVariant::baseline;
  if (name == "swap") return TrainVariant::swap;
  if (name == "mem") return TrainVariant::mem;
  throw ConfigError("variant: unknown training variant \"" + name + "\"");
}

std::string to_string(TrainVariant v) {
  switch (v) {
    case TrainVariant::baseline: return "baseline";
    case TrainVariant::swap: return "swap";
    case TrainVariant::mem: return "mem";
  }
  return "baseline";
}

TrainResult train_agent(const GCEnvironment& env, const UniformBuffer& beta,
                        const GoalPool& pool, const TrainSchedule& schedule,
                        TrainVariant variant,
                        const PrioritizedBuffer* beta_aug,
                        const QTable* pretrained) {
  if (schedule.updates < 0)
    throw ConfigError("train.updates: must be >= 0");
  if (schedule.batch_size < 1)
    throw ConfigError("train.batch_size: must be >= 1");
  if (schedule.learning_rate <= 0.0 || schedule.learning_rate > 1.0)
    throw ConfigError("train.learning_rate: must be within (0, 1]");
  if (beta.size() == 0)
    throw ConfigError("train: dataset buffer is empty");
  if (variant == TrainVariant::mem && (beta_aug == nullptr || beta_aug->size() == 0))
    throw MissingArtifactError(
        "train: variant mem requires a filled priority buffer");
  if (schedule.warm_start && pretrained == nullptr)
    throw MissingArtifactError(
        "train: warm start requires a pretrained table");

  TrainResult result{QTable(env.num_states(), env.num_goals(),
                            env.num_actions(), env.horizon(), schedule.kind),
                     {}};
  QTable& q = result.q;
  if (schedule.warm_start) {
    if (pretrained->num_states() != q.num_states() ||
        pretrained->num_goals() != q.num_goals() ||
        pretrained->num_actions() != q.num_actions() ||
        pretrained->h_max() != q.h_max())
      throw ConfigError("train: pretrained table does not match the environment");
    q.values() = pretrained->values();
  }

  DatasetActionMask mask;
  const DatasetActionMask* mask_ptr = nullptr;
  if (schedule.kind == LearnerKind::dataset_constrained) {
    mask = DatasetActionMask::from_buffer(env, beta);
    mask_ptr = &mask;
  }

  RngStream rng(schedule.rng_seed);
  std::vector<GCTransition> batch;
  for (int u = 0; u < schedule.updates; ++u) {
    switch (variant) {
      case TrainVariant::baseline:
        batch = mixed_sample_swap(env, beta, pool, schedule.batch_size, 0.0,
                                  schedule.her_ratio, rng, &result.stats);
        break;
      case TrainVariant::swap:
        batch = mixed_sample_swap(env, beta, pool, schedule.batch_size,
                                  schedule.rho, schedule.her_ratio, rng,
                                  &result.stats);
        break;
      case TrainVariant::mem:
        batch = mixed_sample(env, beta, *beta_aug, schedule.batch_size,
                             schedule.rho, schedule.her_ratio, rng,
                             &result.stats);
        break;
    }
    for (const GCTransition& t : batch)
      bellman_update(q, env, t, schedule.learning_rate, mask_ptr);
  }
  return result;
}

QTable pretrain_q(const GCEnvironment& env, const UniformBuffer& beta,
                  const GoalPool& pool, const TrainSchedule& schedule) {
  TrainSchedule s = schedule;
  s.kind = LearnerKind::dataset_constrained;
  s.warm_start = false;
  return train_agent(env, beta, pool, s, TrainVariant::swap).q;
}

PrioritizedBuffer fill_priority_buffer(const QTable& frozen,
                                       const GCEnvironment& env,
                                       const UniformBuffer& beta,
                                       const GoalPool& pool,
                                       std::size_t capacity, double alpha,
                                       double eps, RngStream& rng) {
  if (capacity == 0)
    throw ConfigError("buffer.capacity: resolved capacity must be positive");
  PrioritizedBuffer buffer(capacity, alpha, eps);
  const std::size_t chunk = 1024;
  while (buffer.size() < capacity) {
    const std::size_t n = std::min(chunk, capacity - buffer.size());
    for (const auto& aug : sample_swap_batch(env, beta, pool, n, rng)) {
      const double qv =
          frozen.at(aug.base.state, aug.swapped_goal, aug.base.action);
      buffer.insert(aug, priority_from_q(qv, frozen.h_max(), alpha, eps));
    }
  }
  return buffer;
}

}  // namespace pgser
