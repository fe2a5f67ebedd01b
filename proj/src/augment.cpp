#include "pgser/augment.hpp"

#include <algorithm>
#include <stdexcept>

#include "pgser/replay.hpp"

namespace pgser {

AugmentedTransition goal_swap(const GCEnvironment& env, const GCTransition& t,
                              GoalId g_rand) {
  if (g_rand < 0 || g_rand >= env.num_goals())
    throw std::invalid_argument("goal_swap: goal out of range");
  AugmentedTransition out;
  out.base = t;
  out.swapped_goal = g_rand;
  out.reward = sparse_reward(env.goal_of(t.next_state), g_rand);
  // A timeout end stays an end under any goal; goal arrival is recomputed.
  out.done = out.reward == 0 || (t.done && t.reward != 0);
  return out;
}

GoalPool GoalPool::from_dataset(const GCEnvironment& env,
                                const std::vector<Trajectory>& trajectories) {
  GoalPool pool;
  for (const Trajectory& traj : trajectories)
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      if (i == 0) pool.goals_.push_back(env.goal_of(traj.steps[i].state));
      pool.goals_.push_back(env.goal_of(traj.steps[i].next_state));
    }
  std::sort(pool.goals_.begin(), pool.goals_.end());
  pool.goals_.erase(std::unique(pool.goals_.begin(), pool.goals_.end()),
                    pool.goals_.end());
  return pool;
}

GoalId GoalPool::sample(RngStream& rng) const {
  if (goals_.empty())
    throw std::invalid_argument("GoalPool::sample: empty pool");
  return goals_[rng.next_index(goals_.size())];
}

std::vector<AugmentedTransition> sample_swap_batch(const GCEnvironment& env,
                                                   const UniformBuffer& buffer,
                                                   const GoalPool& pool,
                                                   std::size_t n,
                                                   RngStream& rng) {
  if (buffer.size() == 0)
    throw std::invalid_argument("sample_swap_batch: empty buffer");
  if (pool.size() == 0)
    throw std::invalid_argument("sample_swap_batch: empty goal pool");
  std::vector<AugmentedTransition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GCTransition& t = buffer[rng.next_index(buffer.size())];
    out.push_back(goal_swap(env, t, pool.sample(rng)));
  }
  return out;
}

}  // namespace pgser
