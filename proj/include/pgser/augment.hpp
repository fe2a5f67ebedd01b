#pragma once

#include <vector>

#include "pgser/core.hpp"
#include "pgser/rng.hpp"

namespace pgser {

class UniformBuffer;

/// A transition with its goal replaced and reward/done recomputed for the
/// new goal. The original transition is kept so audits can recompute
/// everything from source.
struct AugmentedTransition {
  GCTransition base;
  GoalId swapped_goal = 0;
  int reward = -1;
  bool done = false;

  /// The transition as the learner sees it.
  GCTransition effective() const {
    return {base.state, swapped_goal, base.action, reward, base.next_state,
            done};
  }

  friend bool operator==(const AugmentedTransition&,
                         const AugmentedTransition&) = default;
};

/// Relabels t onto g_rand. The reward is recomputed from the achieved goal of
/// next_state; done is set on goal achievement and preserved for budget
/// timeouts of the source episode.
AugmentedTransition goal_swap(const GCEnvironment& env, const GCTransition& t,
                              GoalId g_rand);

/// The set of goals achieved anywhere in a dataset: the achieved goals of
/// all visited states, including episode starts. Swap targets are drawn
/// uniformly from this set, so swapping never invents unvisited goals.
class GoalPool {
 public:
  static GoalPool from_dataset(const GCEnvironment& env,
                               const std::vector<Trajectory>& trajectories);

  std::size_t size() const { return goals_.size(); }
  const std::vector<GoalId>& goals() const { return goals_; }
  GoalId sample(RngStream& rng) const;

 private:
  std::vector<GoalId> goals_;  // sorted and unique
};

/// n augmented transitions: each pairs a uniformly drawn buffer transition
/// with a uniformly drawn pool goal. Throws std::invalid_argument when the
/// buffer or pool is empty.
std::vector<AugmentedTransition> sample_swap_batch(const GCEnvironment& env,
                                                   const UniformBuffer& buffer,
                                                   const GoalPool& pool,
                                                   std::size_t n,
                                                   RngStream& rng);

}  // namespace pgser
