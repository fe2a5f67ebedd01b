#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pgser/grid.hpp"
#include "pgser/oracle.hpp"
#include "pgser/rng.hpp"

namespace pgser {

/// A generated batch of trajectories together with the environment geometry
/// and the seed that produced it.
struct OfflineDataset {
  GridSpec env_spec;
  std::uint64_t seed = 0;
  std::vector<Trajectory> trajectories;
};

struct GenRequest {
  int n_expert = 0;
  int n_random = 0;
  double noise = 0.0;  // per-step probability of a uniform random action
};

/// Rolls one episode from s0 toward goal. Each step takes a uniform random
/// action with probability noise and otherwise a uniformly chosen
/// distance-reducing action. The episode ends on reaching the goal or after
/// env.horizon() steps. noise = 1 is exactly a uniform random walk.
Trajectory roll_trajectory(const GridEnv& env, const DistanceOracle& oracle,
                           StateId s0, GoalId goal, double noise,
                           RngStream& rng, Provenance tag);

/// n episodes from start/goal pairs drawn uniformly over states and goals,
/// rejecting pairs that are unreachable or already terminal.
/// Throws ConfigError when the environment has no valid pair at all.
std::vector<Trajectory> generate_expert(const GridEnv& env,
                                        const DistanceOracle& oracle, int n,
                                        double noise, RngStream& rng);
std::vector<Trajectory> generate_random(const GridEnv& env,
                                        const DistanceOracle& oracle, int n,
                                        RngStream& rng);

/// Expert trajectories first, then random walks, from independent substreams
/// of `seed`, so the mix ratio is preserved exactly.
OfflineDataset generate_dataset(const GridEnv& env, const DistanceOracle& oracle,
                                const GenRequest& req, std::uint64_t seed);

std::size_t count_transitions(const OfflineDataset& ds);

/// One JSON object per line: a header with the environment geometry, the
/// seed and a format version, then one object per trajectory. All numbers
/// are integers, so serialization is byte-stable.
void save_dataset(const OfflineDataset& ds, const std::filesystem::path& path);

/// Loads and fully validates a dataset: ids in range, transitions chain
/// within each trajectory, dynamics replay to the recorded next states and
/// every reward matches its sparse recomputation. Throws MissingArtifactError
/// when the file does not exist and ParseError naming line and field on any
/// malformed or inconsistent content.
OfflineDataset load_dataset(const std::filesystem::path& path);

}  // namespace pgser
