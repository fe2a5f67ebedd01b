#pragma once

#include <compare>
#include <string>
#include <vector>

#include "pgser/core.hpp"

namespace pgser {

struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class GridVariant { open, four_rooms, islands };

GridVariant parse_grid_variant(const std::string& name);
std::string to_string(GridVariant v);

/// Geometry of a gridworld: size, layout variant and wall cells.
/// Variant contracts: open and four_rooms must be fully connected,
/// islands must have at least two connected components.
struct GridSpec {
  int width = 0;
  int height = 0;
  GridVariant variant = GridVariant::open;
  std::vector<Cell> walls;  // sorted and unique after normalization

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Wall layout splitting the grid into four connected rooms: one wall column,
/// one wall row, and a doorway midway along each half-segment.
std::vector<Cell> four_rooms_walls(int width, int height);

/// Deterministic gridworld. Actions are up/down/left/right; moves into walls
/// or off the grid leave the state unchanged. States are the non-wall cells
/// in row-major order and each state is its own goal.
class GridEnv final : public GCEnvironment {
 public:
  static constexpr ActionId kUp = 0;
  static constexpr ActionId kDown = 1;
  static constexpr ActionId kLeft = 2;
  static constexpr ActionId kRight = 3;

  GridEnv(GridSpec spec, int h_max);

  int num_states() const override { return static_cast<int>(state_to_cell_.size()); }
  int num_goals() const override { return num_states(); }
  int num_actions() const override { return 4; }
  int horizon() const override { return h_max_; }
  StateId step(StateId s, ActionId a) const override;
  GoalId goal_of(StateId s) const override { return s; }
  std::vector<StateId> initial_states() const override;

  const GridSpec& spec() const { return spec_; }
  int components() const { return components_; }
  Cell cell_of(StateId s) const;
  /// State at a cell; throws std::out_of_range for walls or off-grid cells.
  StateId state_of(Cell c) const;
  bool is_wall(Cell c) const;

 private:
  GridSpec spec_;
  int h_max_;
  int components_ = 0;
  std::vector<StateId> cell_to_state_;  // -1 for wall cells
  std::vector<Cell> state_to_cell_;
  std::vector<StateId> step_table_;  // [state * 4 + action]
};

/// Validates a spec against its variant contract and builds the environment.
/// For four_rooms an empty wall list is filled with the standard layout.
/// Throws ConfigError on contract violations.
GridEnv build_env(GridSpec spec, int h_max);

}  // namespace pgser
