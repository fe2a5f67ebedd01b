#include "pgser/grid.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "pgser/errors.hpp"

namespace pgser {

GridVariant parse_grid_variant(const std::string& name) {
  if (name == "open") return GridVariant::open;
  if (name == "four_rooms") return GridVariant::four_rooms;
  if (name == "islands") return GridVariant::islands;
  throw ConfigError("env.variant: unknown grid variant \"" + name + "\"");
}

std::string to_string(GridVariant v) {
  switch (v) {
    case GridVariant::open: return "open";
    case GridVariant::four_rooms: return "four_rooms";
    case GridVariant::islands: return "islands";
  }
  return "open";
}

std::vector<Cell> four_rooms_walls(int width, int height) {
  if (width < 5 || height < 5)
    throw ConfigError("env: four_rooms needs width and height >= 5");
  const int wx = width / 2;
  const int wy = height / 2;
  const Cell doors[4] = {{wx, height / 4},
                         {wx, (3 * height) / 4},
                         {width / 4, wy},
                         {(3 * width) / 4, wy}};
  std::vector<Cell> walls;
  for (int y = 0; y < height; ++y) walls.push_back({wx, y});
  for (int x = 0; x < width; ++x)
    if (x != wx) walls.push_back({x, wy});
  std::erase_if(walls, [&](Cell c) {
    for (const Cell& d : doors)
      if (c == d) return true;
    return false;
  });
  std::sort(walls.begin(), walls.end());
  return walls;
}

GridEnv::GridEnv(GridSpec spec, int h_max)
    : spec_(std::move(spec)), h_max_(h_max) {
  const int w = spec_.width;
  const int h = spec_.height;
  cell_to_state_.assign(static_cast<std::size_t>(w) * h, -1);
  for (const Cell& c : spec_.walls)
    cell_to_state_[static_cast<std::size_t>(c.y) * w + c.x] = -2;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto& slot = cell_to_state_[static_cast<std::size_t>(y) * w + x];
      if (slot == -1) {
        slot = static_cast<StateId>(state_to_cell_.size());
        state_to_cell_.push_back({x, y});
      }
    }

  const int dx[4] = {0, 0, -1, 1};  // up, down, left, right
  const int dy[4] = {-1, 1, 0, 0};
  step_table_.assign(state_to_cell_.size() * 4, 0);
  for (StateId s = 0; s < num_states(); ++s) {
    const Cell c = state_to_cell_[s];
    for (ActionId a = 0; a < 4; ++a) {
      const int nx = c.x + dx[a];
      const int ny = c.y + dy[a];
      StateId next = s;  // blocked moves stay put
      if (nx >= 0 && nx < w && ny >= 0 && ny < h) {
        const StateId t = cell_to_state_[static_cast<std::size_t>(ny) * w + nx];
        if (t >= 0) next = t;
      }
      step_table_[static_cast<std::size_t>(s) * 4 + a] = next;
    }
  }

  std::vector<char> seen(state_to_cell_.size(), 0);
  for (StateId s = 0; s < num_states(); ++s) {
    if (seen[s]) continue;
    ++components_;
    std::deque<StateId> queue{s};
    seen[s] = 1;
    while (!queue.empty()) {
      const StateId cur = queue.front();
      queue.pop_front();
      for (ActionId a = 0; a < 4; ++a) {
        const StateId nxt = step(cur, a);
        if (!seen[nxt]) {
          seen[nxt] = 1;
          queue.push_back(nxt);
        }
      }
    }
  }
}

StateId GridEnv::step(StateId s, ActionId a) const {
  if (s < 0 || s >= num_states()) throw std::out_of_range("GridEnv::step: state");
  if (a < 0 || a >= 4) throw std::out_of_range("GridEnv::step: action");
  return step_table_[static_cast<std::size_t>(s) * 4 + a];
}

std::vector<StateId> GridEnv::initial_states() const {
  std::vector<StateId> out(state_to_cell_.size());
  for (StateId s = 0; s < num_states(); ++s) out[s] = s;
  return out;
}

Cell GridEnv::cell_of(StateId s) const {
  if (s < 0 || s >= num_states()) throw std::out_of_range("GridEnv::cell_of");
  return state_to_cell_[s];
}

StateId GridEnv::state_of(Cell c) const {
  if (c.x < 0 || c.x >= spec_.width || c.y < 0 || c.y >= spec_.height)
    throw std::out_of_range("GridEnv::state_of: cell outside the grid");
  const StateId s = cell_to_state_[static_cast<std::size_t>(c.y) * spec_.width + c.x];
  if (s < 0) throw std::out_of_range("GridEnv::state_of: wall cell");
  return s;
}

bool GridEnv::is_wall(Cell c) const {
  if (c.x < 0 || c.x >= spec_.width || c.y < 0 || c.y >= spec_.height) return false;
  return cell_to_state_[static_cast<std::size_t>(c.y) * spec_.width + c.x] == -2;
}

GridEnv build_env(GridSpec spec, int h_max) {
  if (spec.width < 1 || spec.height < 1 ||
      static_cast<long>(spec.width) * spec.height < 2)
    throw ConfigError("env.width/env.height: grid needs at least two cells");
  if (h_max < 1) throw ConfigError("env.h_max: step budget must be >= 1");
  for (const Cell& c : spec.walls)
    if (c.x < 0 || c.x >= spec.width || c.y < 0 || c.y >= spec.height)
      throw ConfigError("env.walls: wall cell outside the grid");
  std::sort(spec.walls.begin(), spec.walls.end());
  spec.walls.erase(std::unique(spec.walls.begin(), spec.walls.end()),
                   spec.walls.end());
  if (spec.variant == GridVariant::four_rooms && spec.walls.empty())
    spec.walls = four_rooms_walls(spec.width, spec.height);
  const std::size_t open_cells =
      static_cast<std::size_t>(spec.width) * spec.height - spec.walls.size();
  if (open_cells < 2)
    throw ConfigError("env.walls: fewer than two non-wall cells remain");

  GridEnv env(std::move(spec), h_max);
  const GridVariant v = env.spec().variant;
  if (v == GridVariant::islands) {
    if (env.components() < 2)
      throw ConfigError(
          "env.walls: islands layout must split the grid into at least two "
          "components");
  } else if (env.components() != 1) {
    throw ConfigError("env.walls: " + to_string(v) +
                      " layout must be fully connected");
  }
  return env;
}

}  // namespace pgser
