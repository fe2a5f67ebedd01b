#include "pgser/oracle.hpp"

#include <deque>

namespace pgser {

DistanceOracle build_oracle(const GCEnvironment& env) {
  const int S = env.num_states();
  const int G = env.num_goals();
  const int A = env.num_actions();

  std::vector<std::vector<StateId>> preds(S);
  for (StateId s = 0; s < S; ++s)
    for (ActionId a = 0; a < A; ++a) preds[env.step(s, a)].push_back(s);

  DistanceOracle oracle;
  oracle.dist_ = Eigen::ArrayXXi::Constant(S, G, DistanceOracle::kUnreachable);
  std::deque<StateId> queue;
  for (GoalId g = 0; g < G; ++g) {
    queue.clear();
    for (StateId s = 0; s < S; ++s)
      if (env.goal_of(s) == g) {
        oracle.dist_(s, g) = 0;
        queue.push_back(s);
      }
    while (!queue.empty()) {
      const StateId cur = queue.front();
      queue.pop_front();
      const int d = oracle.dist_(cur, g);
      for (StateId p : preds[cur])
        if (oracle.dist_(p, g) < 0) {
          oracle.dist_(p, g) = d + 1;
          queue.push_back(p);
        }
    }
  }
  return oracle;
}

bool DistanceOracle::has_valid_pair() const {
  for (int s = 0; s < dist_.rows(); ++s)
    for (int g = 0; g < dist_.cols(); ++g)
      if (dist_(s, g) > 0) return true;
  return false;
}

std::vector<ActionId> optimal_actions(const GCEnvironment& env,
                                      const DistanceOracle& oracle, StateId s,
                                      GoalId g) {
  std::vector<ActionId> out;
  const int d = oracle.distance(s, g);
  if (d <= 0) return out;
  for (ActionId a = 0; a < env.num_actions(); ++a)
    if (oracle.distance(env.step(s, a), g) == d - 1) out.push_back(a);
  return out;
}

}  // namespace pgser
