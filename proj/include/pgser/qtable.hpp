#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>

#include "pgser/core.hpp"

namespace pgser {

/// Backup rule family: plain takes the max over all actions at the next
/// state, dataset_constrained only over actions the dataset actually took
/// there.
enum class LearnerKind { plain, dataset_constrained };

LearnerKind parse_learner_kind(const std::string& name);
std::string to_string(LearnerKind kind);

/// Dense state x goal x action value table, entries clipped to [-h_max, 0].
/// Fresh tables start at -h_max everywhere: the pessimistic value of a goal
/// that is never reached within the step budget.
class QTable {
 public:
  using Array =
      Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  QTable(int num_states, int num_goals, int num_actions, int h_max,
         LearnerKind kind);

  int num_states() const { return num_states_; }
  int num_goals() const { return num_goals_; }
  int num_actions() const { return num_actions_; }
  int h_max() const { return h_max_; }
  LearnerKind kind() const { return kind_; }

  double at(StateId s, GoalId g, ActionId a) const {
    return values_(row(s, g), a);
  }
  double& entry(StateId s, GoalId g, ActionId a) {
    return values_(row(s, g), a);
  }

  /// max over actions.
  double state_value(StateId s, GoalId g) const {
    return values_.row(row(s, g)).maxCoeff();
  }
  /// Lowest-index maximizing action, so greedy play is deterministic.
  ActionId greedy_action(StateId s, GoalId g) const;

  Eigen::Index row(StateId s, GoalId g) const {
    return static_cast<Eigen::Index>(s) * num_goals_ + g;
  }

  Array& values() { return values_; }
  const Array& values() const { return values_; }

 private:
  int num_states_;
  int num_goals_;
  int num_actions_;
  int h_max_;
  LearnerKind kind_;
  Array values_;  // (num_states * num_goals) x num_actions
};

/// Binary format: magic, version, dimensions, h_max, kind, then the values
/// row-major as 64-bit doubles. Byte-stable for identical tables.
void save_qtable(const QTable& q, const std::filesystem::path& path);
QTable load_qtable(const std::filesystem::path& path);

/// CSV export (s,g,a,q) with full-precision values, for inspection.
void export_qtable_csv(const QTable& q, const std::filesystem::path& path);

}  // namespace pgser
