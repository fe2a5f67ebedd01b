#include "pgser/dataset.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "pgser/errors.hpp"
#include "pgser/util.hpp"

namespace pgser {

using nlohmann::json;

Trajectory roll_trajectory(const GridEnv& env, const DistanceOracle& oracle,
                           StateId s0, GoalId goal, double noise,
                           RngStream& rng, Provenance tag) {
  Trajectory traj;
  traj.goal = goal;
  traj.tag = tag;
  StateId s = s0;
  for (int t = 0; t < env.horizon() && !is_terminal(env, s, goal); ++t) {
    ActionId a;
    if (rng.bernoulli(noise)) {
      a = static_cast<ActionId>(rng.next_index(env.num_actions()));
    } else {
      const auto opts = optimal_actions(env, oracle, s, goal);
      a = opts.empty() ? static_cast<ActionId>(rng.next_index(env.num_actions()))
                       : opts[rng.next_index(opts.size())];
    }
    const StateId ns = env.step(s, a);
    const int r = sparse_reward(env.goal_of(ns), goal);
    const bool done = r == 0 || t + 1 == env.horizon();
    traj.steps.push_back({s, goal, a, r, ns, done});
    s = ns;
  }
  traj.success = !traj.steps.empty() && traj.steps.back().reward == 0;
  return traj;
}

namespace {

std::pair<StateId, GoalId> draw_task(const GridEnv& env,
                                     const DistanceOracle& oracle,
                                     RngStream& rng) {
  while (true) {
    const auto s = static_cast<StateId>(rng.next_index(env.num_states()));
    const auto g = static_cast<GoalId>(rng.next_index(env.num_goals()));
    const int d = oracle.distance(s, g);
    if (d > 0) return {s, g};
  }
}

std::vector<Trajectory> roll_many(const GridEnv& env,
                                  const DistanceOracle& oracle, int n,
                                  double noise, RngStream& rng,
                                  Provenance tag) {
  if (n < 0) throw ConfigError("dataset: trajectory count must be >= 0");
  if (n > 0 && !oracle.has_valid_pair())
    throw ConfigError("dataset: environment has no reachable start/goal pair");
  std::vector<Trajectory> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto [s0, g] = draw_task(env, oracle, rng);
    out.push_back(roll_trajectory(env, oracle, s0, g, noise, rng, tag));
  }
  return out;
}

}  // namespace

std::vector<Trajectory> generate_expert(const GridEnv& env,
                                        const DistanceOracle& oracle, int n,
                                        double noise, RngStream& rng) {
  if (noise < 0.0 || noise > 1.0)
    throw ConfigError("dataset.noise: must be within [0, 1]");
  return roll_many(env, oracle, n, noise, rng, Provenance::expert);
}

std::vector<Trajectory> generate_random(const GridEnv& env,
                                        const DistanceOracle& oracle, int n,
                                        RngStream& rng) {
  return roll_many(env, oracle, n, 1.0, rng, Provenance::random);
}

OfflineDataset generate_dataset(const GridEnv& env, const DistanceOracle& oracle,
                                const GenRequest& req, std::uint64_t seed) {
  OfflineDataset ds;
  ds.env_spec = env.spec();
  ds.seed = seed;
  RngStream expert_rng(derive_seed(seed, "expert"));
  RngStream random_rng(derive_seed(seed, "random"));
  ds.trajectories =
      generate_expert(env, oracle, req.n_expert, req.noise, expert_rng);
  auto walks = generate_random(env, oracle, req.n_random, random_rng);
  ds.trajectories.insert(ds.trajectories.end(),
                         std::make_move_iterator(walks.begin()),
                         std::make_move_iterator(walks.end()));
  return ds;
}

std::size_t count_transitions(const OfflineDataset& ds) {
  std::size_t n = 0;
  for (const auto& t : ds.trajectories) n += t.steps.size();
  return n;
}

namespace {

json spec_to_json(const GridSpec& spec) {
  json walls = json::array();
  for (const Cell& c : spec.walls) walls.push_back({c.x, c.y});
  return {{"width", spec.width},
          {"height", spec.height},
          {"variant", to_string(spec.variant)},
          {"walls", std::move(walls)}};
}

GridSpec spec_from_json(const json& j, const std::string& where) {
  GridSpec spec;
  try {
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    spec.variant = parse_grid_variant(j.at("variant").get<std::string>());
    for (const auto& w : j.at("walls")) {
      if (!w.is_array() || w.size() != 2)
        throw ParseError(where + ": field \"walls\" entries must be [x, y]");
      spec.walls.push_back({w[0].get<int>(), w[1].get<int>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(where + ": bad env object (" + e.what() + ")");
  }
  return spec;
}

const char* tag_name(Provenance p) {
  return p == Provenance::expert ? "expert" : "random";
}

Provenance parse_tag(const std::string& s, const std::string& where) {
  if (s == "expert") return Provenance::expert;
  if (s == "random") return Provenance::random;
  throw ParseError(where + ": field \"tag\" must be \"expert\" or \"random\"");
}

}  // namespace

void save_dataset(const OfflineDataset& ds, const std::filesystem::path& path) {
  std::ostringstream out;
  json header = {{"env", spec_to_json(ds.env_spec)},
                 {"seed", ds.seed},
                 {"version", 1}};
  out << header.dump() << '\n';
  for (const auto& traj : ds.trajectories) {
    json steps = json::array();
    for (const auto& t : traj.steps)
      steps.push_back(
          {t.state, t.action, t.reward, t.next_state, t.done ? 1 : 0});
    json line = {{"goal", traj.goal},
                 {"success", traj.success},
                 {"tag", tag_name(traj.tag)},
                 {"steps", std::move(steps)}};
    out << line.dump() << '\n';
  }
  write_file_atomic(path, out.str());
}

OfflineDataset load_dataset(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;

  auto next_json = [&](json& out) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        out = json::parse(line);
      } catch (const json::exception& e) {
        throw ParseError("dataset line " + std::to_string(lineno) +
                         ": invalid JSON (" + e.what() + ")");
      }
      return true;
    }
    return false;
  };

  json header;
  if (!next_json(header))
    throw ParseError("dataset line 1: missing header");
  const std::string hwhere = "dataset line " + std::to_string(lineno);
  OfflineDataset ds;
  try {
    if (header.at("version").get<int>() != 1)
      throw ParseError(hwhere + ": field \"version\" must be 1");
    ds.seed = header.at("seed").get<std::uint64_t>();
    ds.env_spec = spec_from_json(header.at("env"), hwhere);
  } catch (const json::exception& e) {
    throw ParseError(hwhere + ": bad header (" + e.what() + ")");
  }

  // Geometry validation reuses the environment contract; the step budget is
  // not recorded in the file, so a placeholder horizon is used here.
  GridEnv env = build_env(ds.env_spec, 1);
  ds.env_spec = env.spec();

  json jt;
  while (next_json(jt)) {
    const std::string where = "dataset line " + std::to_string(lineno);
    Trajectory traj;
    try {
      traj.goal = jt.at("goal").get<GoalId>();
      traj.success = jt.at("success").get<bool>();
      traj.tag = parse_tag(jt.at("tag").get<std::string>(), where);
      const json& steps = jt.at("steps");
      if (!steps.is_array() || steps.empty())
        throw ParseError(where + ": field \"steps\" must be a non-empty array");
      for (const auto& st : steps) {
        if (!st.is_array() || st.size() != 5)
          throw ParseError(where +
                           ": field \"steps\" entries must be "
                           "[s, a, r, s_next, done]");
        GCTransition t;
        t.state = st[0].get<StateId>();
        t.goal = traj.goal;
        t.action = st[1].get<ActionId>();
        t.reward = st[2].get<int>();
        t.next_state = st[3].get<StateId>();
        const int done = st[4].get<int>();
        if (done != 0 && done != 1)
          throw ParseError(where + ": field \"done\" must be 0 or 1");
        t.done = done == 1;
        traj.steps.push_back(t);
      }
    } catch (const json::exception& e) {
      throw ParseError(where + ": bad trajectory (" + e.what() + ")");
    }

    if (traj.goal < 0 || traj.goal >= env.num_goals())
      throw ParseError(where + ": field \"goal\" out of range");
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      const GCTransition& t = traj.steps[i];
      const bool last = i + 1 == traj.steps.size();
      if (t.state < 0 || t.state >= env.num_states())
        throw ParseError(where + ": field \"steps\" state out of range");
      if (t.action < 0 || t.action >= env.num_actions())
        throw ParseError(where + ": field \"steps\" action out of range");
      if (env.step(t.state, t.action) != t.next_state)
        throw ParseError(where +
                         ": field \"steps\" next state disagrees with the "
                         "recorded dynamics");
      if (t.reward != sparse_reward(env.goal_of(t.next_state), traj.goal))
        throw ParseError(where +
                         ": field \"steps\" reward disagrees with its sparse "
                         "recomputation");
      if (i > 0 && traj.steps[i - 1].next_state != t.state)
        throw ParseError(where + ": field \"steps\" transitions do not chain");
      if (!last && (t.reward == 0 || t.done))
        throw ParseError(where +
                         ": field \"steps\" episode continues past a terminal "
                         "or done step");
      if (last && !t.done)
        throw ParseError(where + ": field \"steps\" final step must be done");
    }
    if (traj.success != (traj.steps.back().reward == 0))
      throw ParseError(where +
                       ": field \"success\" disagrees with the final reward");
    ds.trajectories.push_back(std::move(traj));
  }
  return ds;
}

}  // namespace pgser
