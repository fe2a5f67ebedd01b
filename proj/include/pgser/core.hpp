#pragma once

#include <cstdint>
#include <vector>

namespace pgser {

using StateId = std::int32_t;
using GoalId = std::int32_t;
using ActionId = std::int32_t;

/// One goal-conditioned step. The reward is sparse: 0 when next_state
/// achieves the goal, -1 otherwise. `done` marks episode end, either by
/// reaching the goal or by exhausting the step budget.
struct GCTransition {
  StateId state = 0;
  GoalId goal = 0;
  ActionId action = 0;
  int reward = -1;
  StateId next_state = 0;
  bool done = false;

  friend bool operator==(const GCTransition&, const GCTransition&) = default;
};

enum class Provenance { expert, random };

struct Trajectory {
  GoalId goal = 0;
  bool success = false;
  Provenance tag = Provenance::random;
  std::vector<GCTransition> steps;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Deterministic goal-conditioned environment over discrete states.
/// goal_of maps every state to the goal it achieves; episodes end as soon as
/// the current state achieves the commanded goal.
class GCEnvironment {
 public:
  virtual ~GCEnvironment() = default;
  virtual int num_states() const = 0;
  virtual int num_goals() const = 0;
  virtual int num_actions() const = 0;
  /// Step budget per episode; also the magnitude of the worst value.
  virtual int horizon() const = 0;
  virtual StateId step(StateId s, ActionId a) const = 0;
  virtual GoalId goal_of(StateId s) const = 0;
  virtual std::vector<StateId> initial_states() const = 0;
};

/// 0 on achieving the goal, -1 otherwise.
inline int sparse_reward(GoalId achieved, GoalId goal) {
  return achieved == goal ? 0 : -1;
}

/// True when s already achieves g.
inline bool is_terminal(const GCEnvironment& env, StateId s, GoalId g) {
  return env.goal_of(s) == g;
}

}  // namespace pgser
