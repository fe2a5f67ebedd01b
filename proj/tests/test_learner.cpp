#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pgser/dataset.hpp"
#include "pgser/errors.hpp"
#include "pgser/learner.hpp"
#include "pgser/oracle.hpp"

using namespace pgser;

namespace {

GCTransition make_step(const GridEnv& env, StateId s, ActionId a, GoalId g) {
  GCTransition t;
  t.state = s;
  t.goal = g;
  t.action = a;
  t.next_state = env.step(s, a);
  t.reward = sparse_reward(env.goal_of(t.next_state), g);
  t.done = t.reward == 0;
  return t;
}

// Synchronous value-iteration pass over every (state, goal, action) triple.
void sweep(QTable& q, const GridEnv& env, double lr,
           const DatasetActionMask* mask = nullptr) {
  for (StateId s = 0; s < env.num_states(); ++s)
    for (GoalId g = 0; g < env.num_goals(); ++g)
      for (ActionId a = 0; a < env.num_actions(); ++a)
        bellman_update(q, env, make_step(env, s, a, g), lr, mask);
}

// Closed-form fixed point: 0 at a terminal pair, otherwise one step of cost
// plus the value of where the action lands, floored at -h_max.
double exact_q(const GridEnv& env, const DistanceOracle& oracle, StateId s,
               GoalId g, ActionId a) {
  if (is_terminal(env, s, g)) return 0.0;
  const int d = oracle.distance(env.step(s, a), g);
  if (d < 0 || 1 + d >= env.horizon())
    return -static_cast<double>(env.horizon());
  return -1.0 - static_cast<double>(d);
}

}  // namespace

TEST_CASE("a terminal pair always targets zero and arrival targets minus one") {
  const GridEnv env = build_env({4, 4, GridVariant::open, {}}, 12);
  QTable q(env.num_states(), env.num_goals(), env.num_actions(), env.horizon(),
           LearnerKind::plain);
  const StateId s = env.state_of({2, 2});
  // already there: stepping anywhere still targets 0
  for (ActionId a = 0; a < env.num_actions(); ++a) {
    const GCTransition t = make_step(env, s, a, env.goal_of(s));
    CHECK(bellman_target(q, env, t, nullptr) == 0.0);
  }
  // arriving: exactly -1 no matter how bad the table thinks the next state is
  const StateId left = env.state_of({1, 2});
  const GCTransition arrive = make_step(env, left, 3 /*right*/, env.goal_of(s));
  REQUIRE(arrive.next_state == s);
  CHECK(arrive.reward == 0);
  CHECK(bellman_target(q, env, arrive, nullptr) == -1.0);
}

TEST_CASE("the stored done flag never enters the backup") {
  // a budget timeout stores done=true with reward -1; the target must match
  // the identical transition without the flag, so values flow through
  // timeouts
  const GridEnv env = build_env({4, 4, GridVariant::open, {}}, 12);
  QTable q(env.num_states(), env.num_goals(), env.num_actions(), env.horizon(),
           LearnerKind::plain);
  RngStream rng(3);
  for (int i = 0; i < 500; ++i) {
    const StateId s = static_cast<StateId>(rng.next_index(env.num_states()));
    const ActionId a = static_cast<ActionId>(rng.next_index(env.num_actions()));
    const GoalId g = static_cast<GoalId>(rng.next_index(env.num_goals()));
    GCTransition t = make_step(env, s, a, g);
    GCTransition timeout = t;
    timeout.done = true;
    CHECK(bellman_target(q, env, t, nullptr) ==
          bellman_target(q, env, timeout, nullptr));
    q.entry(s, g, a) = -static_cast<double>(rng.next_index(env.horizon()));
  }
}

TEST_CASE("a split corridor separates reachable and unreachable values") {
  // 7x1 corridor with a wall in the middle: two islands of three cells.
  // From the left island the near goal two cells over is worth -2 and any
  // goal on the far island bottoms out at -h_max.
  const GridEnv env = build_env({7, 1, GridVariant::islands, {{3, 0}}}, 4);
  REQUIRE(env.num_states() == 6);
  const DistanceOracle oracle = build_oracle(env);
  const StateId start = env.state_of({0, 0});
  const GoalId near_goal = env.goal_of(env.state_of({2, 0}));
  const GoalId far_goal = env.goal_of(env.state_of({4, 0}));
  REQUIRE(oracle.distance(start, near_goal) == 2);
  REQUIRE(oracle.distance(start, far_goal) == DistanceOracle::kUnreachable);

  QTable q(env.num_states(), env.num_goals(), env.num_actions(), env.horizon(),
           LearnerKind::plain);
  for (int pass = 0; pass < env.horizon() + 2; ++pass) sweep(q, env, 1.0);

  const ActionId right = 3;
  CHECK(q.at(start, near_goal, right) == -2.0);
  CHECK(q.state_value(start, near_goal) == -2.0);
  for (StateId s : {env.state_of({0, 0}), env.state_of({1, 0}),
                    env.state_of({2, 0})})
    for (ActionId a = 0; a < env.num_actions(); ++a)
      CHECK(q.at(s, far_goal, a) == -4.0);
  // and the values stay put under further sweeps
  sweep(q, env, 1.0);
  CHECK(q.at(start, near_goal, right) == -2.0);
  CHECK(q.at(start, far_goal, 0) == -4.0);
}

TEST_CASE("full sweeps converge to one plus the landing distance everywhere") {
  const GridEnv env = build_env({5, 5, GridVariant::open, {}}, 10);
  const DistanceOracle oracle = build_oracle(env);
  QTable q(env.num_states(), env.num_goals(), env.num_actions(), env.horizon(),
           LearnerKind::plain);
  for (int pass = 0; pass < env.horizon() + 2; ++pass) sweep(q, env, 1.0);
  for (StateId s = 0; s < env.num_states(); ++s)
    for (GoalId g = 0; g < env.num_goals(); ++g)
      for (ActionId a = 0; a < env.num_actions(); ++a)
        CHECK(q.at(s, g, a) ==
              doctest::Approx(exact_q(env, oracle, s, g, a)).epsilon(1e-12));
}

TEST_CASE("partial learning rates reach the same fixed point") {
  const GridEnv env = build_env({4, 4, GridVariant::open, {}}, 8);
  const DistanceOracle oracle = build_oracle(env);
  QTable q(env.num_states(), env.num_goals(), env.num_actions(), env.horizon(),
           LearnerKind::plain);
  for (int pass = 0; pass < 200; ++pass) sweep(q, env, 0.3);
  for (StateId s = 0; s < env.num_states(); ++s)
    for (GoalId g = 0; g < env.num_goals(); ++g)
      for (ActionId a = 0; a < env.num_actions(); ++a)
        CHECK(std::abs(q.at(s, g, a) - exact_q(env, oracle, s, g, a)) < 1e-6);
}

TEST_CASE("greedy play on a converged table is optimal from every start") {
  const GridEnv env = build_env({5, 5, GridVariant::open, {}}, 10);
  const DistanceOracle oracle = build_oracle(env);
  QTable q(env.num_states(), env.num_goals(), env.num_actions(), env.horizon(),
           LearnerKind::plain);
  for (int pass = 0; pass < env.horizon() + 2; ++pass) sweep(q, env, 1.0);
  const GreedyPolicy policy{&q};
  for (StateId s = 0; s < env.num_states(); ++s)
    for (GoalId g = 0; g < env.num_goals(); ++g) {
      const int d = oracle.distance(s, g);
      StateId cur = s;
      int steps = 0;
      while (!is_terminal(env, cur, g) && steps < env.horizon()) {
        cur = env.step(cur, policy(cur, g));
        ++steps;
      }
      CHECK(is_terminal(env, cur, g));
      CHECK(steps == d);
    }
}

TEST_CASE("the dataset mask records exactly the observed pairs") {
  const GridEnv env = build_env({3, 3, GridVariant::open, {}}, 6);
  Trajectory traj;
  traj.goal = env.goal_of(env.state_of({2, 0}));
  GCTransition a = make_step(env, env.state_of({0, 0}), 3, traj.goal);
  GCTransition b = make_step(env, a.next_state, 1, traj.goal);
  traj.steps = {a, b};
  const UniformBuffer buffer = UniformBuffer::from_dataset({traj});
  const DatasetActionMask mask = DatasetActionMask::from_buffer(env, buffer);
  for (StateId s = 0; s < env.num_states(); ++s)
    for (ActionId act = 0; act < env.num_actions(); ++act) {
      const bool expect = (s == a.state && act == a.action) ||
                          (s == b.state && act == b.action);
      CHECK(mask.observed(s, act) == expect);
    }
  CHECK(mask.any_action(a.state));
  CHECK(mask.any_action(b.state));
  CHECK(!mask.any_action(env.state_of({2, 2})));
}

TEST_CASE("the constrained backup bootstraps only through observed actions") {
  const GridEnv env = build_env({4, 1, GridVariant::open, {}}, 5);
  const StateId s0 = env.state_of({0, 0});
  const StateId s1 = env.state_of({1, 0});
  const StateId s2 = env.state_of({2, 0});
  const GoalId g = env.goal_of(env.state_of({3, 0}));
  QTable q(env.num_states(), env.num_goals(), env.num_actions(), env.horizon(),
           LearnerKind::dataset_constrained);
  // hand the table a great unobserved action and a poor observed one at s1
  q.entry(s1, g, 3) = -1.0;  // right, not in the data
  q.entry(s1, g, 0) = -3.0;  // up (a no-op), in the data

  Trajectory traj;
  traj.goal = g;
  traj.steps = {make_step(env, s1, 0, g)};
  const UniformBuffer buffer = UniformBuffer::from_dataset({traj});
  const DatasetActionMask mask = DatasetActionMask::from_buffer(env, buffer);

  const GCTransition probe = make_step(env, s0, 3, g);
  REQUIRE(probe.next_state == s1);
  CHECK(bellman_target(q, env, probe, nullptr) == -2.0);   // free max
  CHECK(bellman_target(q, env, probe, &mask) == -4.0);     // only the no-op
  // a non-terminal landing state with no data at all bottoms out at the floor
  GCTransition shifted = probe;
  shifted.next_state = s2;
  REQUIRE(!is_terminal(env, s2, g));
  CHECK(!mask.any_action(s2));
  CHECK(bellman_target(q, env, shifted, &mask) == -5.0);
}

TEST_CASE("zero updates leave the pessimistic initialization untouched") {
  const GridEnv env = build_env({4, 4, GridVariant::open, {}}, 8);
  const DistanceOracle oracle = build_oracle(env);
  const OfflineDataset ds = generate_dataset(env, oracle, {5, 10, 0.2}, 7);
  const UniformBuffer beta = UniformBuffer::from_dataset(ds.trajectories);
  const GoalPool pool = GoalPool::from_dataset(env, ds.trajectories);
  TrainSchedule schedule;
  schedule.updates = 0;
  schedule.rng_seed = 1;
  const TrainResult r = train_agent(env, beta, pool, schedule,
                                    TrainVariant::swap);
  CHECK((r.q.values() == -8.0).all());
  CHECK(r.stats.from_dataset == 0);
  CHECK(r.stats.from_augmented == 0);
  CHECK(r.stats.her_relabels == 0);
}

TEST_CASE("training is deterministic in the schedule seed") {
  const GridEnv env = build_env({5, 5, GridVariant::open, {}}, 10);
  const DistanceOracle oracle = build_oracle(env);
  const OfflineDataset ds = generate_dataset(env, oracle, {10, 20, 0.2}, 11);
  const UniformBuffer beta = UniformBuffer::from_dataset(ds.trajectories);
  const GoalPool pool = GoalPool::from_dataset(env, ds.trajectories);
  TrainSchedule schedule;
  schedule.updates = 400;
  schedule.batch_size = 16;
  schedule.rng_seed = 99;
  const TrainResult r1 = train_agent(env, beta, pool, schedule,
                                     TrainVariant::swap);
  const TrainResult r2 = train_agent(env, beta, pool, schedule,
                                     TrainVariant::swap);
  CHECK((r1.q.values() == r2.q.values()).all());
  CHECK(r1.stats.from_dataset == r2.stats.from_dataset);
  CHECK(r1.stats.her_relabels == r2.stats.her_relabels);
  schedule.rng_seed = 100;
  const TrainResult r3 = train_agent(env, beta, pool, schedule,
                                     TrainVariant::swap);
  CHECK(!(r1.q.values() == r3.q.values()).all());
}

TEST_CASE("variant sampling counters add up") {
  const GridEnv env = build_env({5, 5, GridVariant::open, {}}, 10);
  const DistanceOracle oracle = build_oracle(env);
  const OfflineDataset ds = generate_dataset(env, oracle, {10, 20, 0.2}, 13);
  const UniformBuffer beta = UniformBuffer::from_dataset(ds.trajectories);
  const GoalPool pool = GoalPool::from_dataset(env, ds.trajectories);
  TrainSchedule schedule;
  schedule.updates = 25;
  schedule.batch_size = 64;
  schedule.rho = 0.5;
  schedule.rng_seed = 5;

  const TrainResult base = train_agent(env, beta, pool, schedule,
                                       TrainVariant::baseline);
  CHECK(base.stats.from_augmented == 0);
  CHECK(base.stats.from_dataset == 25u * 64u);

  const TrainResult swap = train_agent(env, beta, pool, schedule,
                                       TrainVariant::swap);
  CHECK(swap.stats.from_augmented == 25u * 32u);
  CHECK(swap.stats.from_dataset == 25u * 32u);

  QTable frozen(env.num_states(), env.num_goals(), env.num_actions(),
                env.horizon(), LearnerKind::dataset_constrained);
  RngStream fill_rng(6);
  const PrioritizedBuffer aug =
      fill_priority_buffer(frozen, env, beta, pool, 300, 1.0, 1e-3, fill_rng);
  const TrainResult mem = train_agent(env, beta, pool, schedule,
                                      TrainVariant::mem, &aug);
  CHECK(mem.stats.from_augmented == 25u * 32u);
  CHECK(mem.stats.from_dataset == 25u * 32u);
}

TEST_CASE("missing prerequisites are reported as missing artifacts") {
  const GridEnv env = build_env({4, 4, GridVariant::open, {}}, 8);
  const DistanceOracle oracle = build_oracle(env);
  const OfflineDataset ds = generate_dataset(env, oracle, {5, 10, 0.2}, 17);
  const UniformBuffer beta = UniformBuffer::from_dataset(ds.trajectories);
  const GoalPool pool = GoalPool::from_dataset(env, ds.trajectories);
  TrainSchedule schedule;
  schedule.updates = 1;
  schedule.rng_seed = 1;
  CHECK_THROWS_AS(train_agent(env, beta, pool, schedule, TrainVariant::mem),
                  MissingArtifactError);
  const PrioritizedBuffer empty(8, 1.0, 1e-3);
  CHECK_THROWS_AS(
      train_agent(env, beta, pool, schedule, TrainVariant::mem, &empty),
      MissingArtifactError);
  schedule.warm_start = true;
  CHECK_THROWS_AS(
      train_agent(env, beta, pool, schedule, TrainVariant::baseline),
      MissingArtifactError);
  const QTable wrong(3, 3, 4, 8, LearnerKind::plain);
  CHECK_THROWS_AS(train_agent(env, beta, pool, schedule,
                              TrainVariant::baseline, nullptr, &wrong),
                  ConfigError);
  schedule.warm_start = false;
  schedule.learning_rate = 0.0;
  CHECK_THROWS_AS(
      train_agent(env, beta, pool, schedule, TrainVariant::baseline),
      ConfigError);
}

TEST_CASE("warm starts copy the pretrained values before training") {
  const GridEnv env = build_env({4, 4, GridVariant::open, {}}, 8);
  const DistanceOracle oracle = build_oracle(env);
  const OfflineDataset ds = generate_dataset(env, oracle, {5, 10, 0.2}, 19);
  const UniformBuffer beta = UniformBuffer::from_dataset(ds.trajectories);
  const GoalPool pool = GoalPool::from_dataset(env, ds.trajectories);
  QTable pretrained(env.num_states(), env.num_goals(), env.num_actions(),
                    env.horizon(), LearnerKind::dataset_constrained);
  RngStream rng(20);
  for (Eigen::Index i = 0; i < pretrained.values().rows(); ++i)
    for (Eigen::Index j = 0; j < pretrained.values().cols(); ++j)
      pretrained.values()(i, j) = -8.0 * rng.next_double();
  TrainSchedule schedule;
  schedule.updates = 0;
  schedule.warm_start = true;
  schedule.rng_seed = 2;
  const TrainResult warm = train_agent(env, beta, pool, schedule,
                                       TrainVariant::baseline, nullptr,
                                       &pretrained);
  CHECK((warm.q.values() == pretrained.values()).all());
}

TEST_CASE("pretraining always runs constrained and from scratch") {
  const GridEnv env = build_env({4, 4, GridVariant::open, {}}, 8);
  const DistanceOracle oracle = build_oracle(env);
  const OfflineDataset ds = generate_dataset(env, oracle, {5, 10, 0.2}, 23);
  const UniformBuffer beta = UniformBuffer::from_dataset(ds.trajectories);
  const GoalPool pool = GoalPool::from_dataset(env, ds.trajectories);
  TrainSchedule schedule;
  schedule.updates = 50;
  schedule.batch_size = 8;
  schedule.rng_seed = 4;
  schedule.kind = LearnerKind::plain;  // overridden inside
  schedule.warm_start = true;          // overridden: no pretrained table needed
  const QTable q = pretrain_q(env, beta, pool, schedule);
  CHECK(q.kind() == LearnerKind::dataset_constrained);
  CHECK((q.values() <= 0.0).all());
  CHECK((q.values() >= -8.0).all());
}

TEST_CASE("buffer filling scores every item with the frozen table") {
  const GridEnv env = build_env({5, 5, GridVariant::open, {}}, 10);
  const DistanceOracle oracle = build_oracle(env);
  const OfflineDataset ds = generate_dataset(env, oracle, {10, 20, 0.2}, 29);
  const UniformBuffer beta = UniformBuffer::from_dataset(ds.trajectories);
  const GoalPool pool = GoalPool::from_dataset(env, ds.trajectories);
  QTable frozen(env.num_states(), env.num_goals(), env.num_actions(),
                env.horizon(), LearnerKind::dataset_constrained);
  for (int pass = 0; pass < env.horizon() + 2; ++pass) sweep(frozen, env, 1.0);
  RngStream rng(30);
  const std::size_t capacity = 2500;  // forces multiple fill chunks
  const PrioritizedBuffer buffer = fill_priority_buffer(
      frozen, env, beta, pool, capacity, 1.0, 1e-3, rng);
  REQUIRE(buffer.size() == capacity);
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const AugmentedTransition& item = buffer.item(i);
    const double qv =
        frozen.at(item.base.state, item.swapped_goal, item.base.action);
    CHECK(buffer.priority(i) ==
          priority_from_q(qv, frozen.h_max(), 1.0, 1e-3));
    const GCTransition eff = item.effective();
    CHECK(eff.goal == item.swapped_goal);
    CHECK(eff.reward == sparse_reward(env.goal_of(eff.next_state), eff.goal));
  }
  RngStream rng2(31);
  CHECK_THROWS_AS(
      fill_priority_buffer(frozen, env, beta, pool, 0, 1.0, 1e-3, rng2),
      ConfigError);
}

TEST_CASE("trained values stay inside the value range under fuzzing") {
  const GridEnv env = build_env({6, 6, GridVariant::four_rooms, {}}, 20);
  const DistanceOracle oracle = build_oracle(env);
  const OfflineDataset ds = generate_dataset(env, oracle, {10, 30, 0.3}, 31);
  const UniformBuffer beta = UniformBuffer::from_dataset(ds.trajectories);
  const GoalPool pool = GoalPool::from_dataset(env, ds.trajectories);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    TrainSchedule schedule;
    schedule.updates = 300;
    schedule.batch_size = 32;
    schedule.learning_rate = 1.0;
    schedule.rng_seed = seed;
    for (TrainVariant v : {TrainVariant::baseline, TrainVariant::swap}) {
      const TrainResult r = train_agent(env, beta, pool, schedule, v);
      CHECK((r.q.values() <= 0.0).all());
      CHECK((r.q.values() >= -20.0).all());
      CHECK(r.q.values().isFinite().all());
    }
  }
}

TEST_CASE("stochastic training approaches the oracle on a covered grid") {
  // random-walk data covers every state-action pair of a small grid, so the
  // unconstrained learner should get close to the exact values
  const GridEnv env = build_env({4, 4, GridVariant::open, {}}, 8);
  const DistanceOracle oracle = build_oracle(env);
  const OfflineDataset ds = generate_dataset(env, oracle, {0, 120, 0.5}, 37);
  const UniformBuffer beta = UniformBuffer::from_dataset(ds.trajectories);
  const GoalPool pool = GoalPool::from_dataset(env, ds.trajectories);
  REQUIRE(pool.size() == static_cast<std::size_t>(env.num_goals()));
  TrainSchedule schedule;
  schedule.updates = 12000;
  schedule.batch_size = 32;
  schedule.learning_rate = 0.5;
  schedule.rho = 0.5;
  schedule.her_ratio = 0.5;
  schedule.rng_seed = 41;
  schedule.kind = LearnerKind::plain;
  const TrainResult r = train_agent(env, beta, pool, schedule,
                                    TrainVariant::swap);
  double worst = 0.0;
  for (StateId s = 0; s < env.num_states(); ++s)
    for (GoalId g = 0; g < env.num_goals(); ++g)
      for (ActionId a = 0; a < env.num_actions(); ++a)
        worst = std::max(worst, std::abs(r.q.at(s, g, a) -
                                         exact_q(env, oracle, s, g, a)));
  CHECK(worst < 0.05);
}
