#pragma once

#include <Eigen/Core>
#include <vector>

#include "pgser/core.hpp"

namespace pgser {

/// Exact shortest-path step counts from every state to every goal, computed
/// by breadth-first search over reversed dynamics. Ground truth for tests,
/// expert action selection and task sampling; never used by the learner.
class DistanceOracle {
 public:
  static constexpr int kUnreachable = -1;

  int distance(StateId s, GoalId g) const { return dist_(s, g); }
  bool reachable(StateId s, GoalId g) const { return dist_(s, g) >= 0; }
  int num_states() const { return static_cast<int>(dist_.rows()); }
  int num_goals() const { return static_cast<int>(dist_.cols()); }

  /// True when some state can reach some distinct goal.
  bool has_valid_pair() const;

 private:
  friend DistanceOracle build_oracle(const GCEnvironment& env);
  Eigen::ArrayXXi dist_;
};

DistanceOracle build_oracle(const GCEnvironment& env);

/// Actions that reduce the distance to g by one; empty when g is already
/// achieved or unreachable.
std::vector<ActionId> optimal_actions(const GCEnvironment& env,
                                      const DistanceOracle& oracle, StateId s,
                                      GoalId g);

}  // namespace pgser
