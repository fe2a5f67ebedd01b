#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pgser/augment.hpp"
#include "pgser/core.hpp"
#include "pgser/rng.hpp"
#include "pgser/sum_tree.hpp"

namespace pgser {

/// Flat, uniformly sampled view of a dataset's transitions that keeps each
/// transition's place in its source trajectory, which future-goal relabeling
/// needs.
class UniformBuffer {
 public:
  struct Position {
    std::int32_t trajectory = 0;
    std::int32_t step = 0;
  };

  static UniformBuffer from_dataset(const std::vector<Trajectory>& trajectories);

  std::size_t size() const { return items_.size(); }
  const GCTransition& operator[](std::size_t i) const { return items_[i]; }
  Position position(std::size_t i) const { return positions_[i]; }
  std::size_t trajectory_length(std::int32_t traj) const {
    return lengths_[traj];
  }
  bool trajectory_success(std::int32_t traj) const { return success_[traj]; }

 private:
  std::vector<GCTransition> items_;
  std::vector<Position> positions_;
  std::vector<std::size_t> lengths_;
  std::vector<char> success_;
};

/// Sampling priority of an augmented transition from its frozen Q-value.
/// Shifts q from [-h_max, 0] to [0, 1], adds eps so no priority vanishes,
/// and sharpens with exponent alpha. Throws std::domain_error for q outside
/// the clipped range.
double priority_from_q(double q, int h_max, double alpha, double eps);

/// Fixed-capacity buffer sampled proportionally to stored priorities via a
/// sum tree. Insertion beyond capacity overwrites the lowest-priority item.
class PrioritizedBuffer {
 public:
  PrioritizedBuffer(std::size_t capacity, double alpha, double eps);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  double alpha() const { return alpha_; }
  double eps() const { return eps_; }
  double total_priority() const { return tree_.total(); }

  const AugmentedTransition& item(std::size_t slot) const;
  double priority(std::size_t slot) const;

  /// Returns the slot the item landed in.
  std::size_t insert(const AugmentedTransition& item, double priority);
  void update_priority(std::size_t slot, double priority);

  /// One uniform draw, then a proportional descent.
  std::size_t sample_index(RngStream& rng) const;
  std::vector<std::size_t> sample(std::size_t n, RngStream& rng) const;

  bool check_tree(double tol = 0.0) const { return tree_.check_sums(tol); }

 private:
  std::size_t capacity_;
  double alpha_;
  double eps_;
  SumTree tree_;
  std::vector<AugmentedTransition> items_;
};

/// Hindsight relabeling with the future strategy: replaces the goal of
/// buffer[index] with the achieved goal of a uniformly chosen step at or
/// after it in the same trajectory, so a transition is always a valid sample
/// of its relabeled goal.
GCTransition her_relabel(const GCEnvironment& env, const UniformBuffer& buffer,
                         std::size_t index, RngStream& rng);

struct SampleStats {
  std::size_t from_augmented = 0;
  std::size_t from_dataset = 0;
  std::size_t her_relabels = 0;
};

/// floor(rho * batch) transitions from the priority buffer, the rest drawn
/// uniformly from the dataset buffer with independent HER relabeling at
/// her_ratio. rho = 0 degenerates to plain dataset sampling.
std::vector<GCTransition> mixed_sample(const GCEnvironment& env,
                                       const UniformBuffer& beta,
                                       const PrioritizedBuffer& beta_aug,
                                       std::size_t batch, double rho,
                                       double her_ratio, RngStream& rng,
                                       SampleStats* stats = nullptr);

/// Same mix, but the augmented share is generated fresh by random
/// goal-swapping instead of drawn from a priority buffer.
std::vector<GCTransition> mixed_sample_swap(const GCEnvironment& env,
                                            const UniformBuffer& beta,
                                            const GoalPool& pool,
                                            std::size_t batch, double rho,
                                            double her_ratio, RngStream& rng,
                                            SampleStats* stats = nullptr);

/// CSV dump (s,g,a,r,s_next,done,priority) of every stored item, in slot
/// order. Priorities use full precision so a reload is exact.
void save_buffer_csv(const PrioritizedBuffer& buffer,
                     const std::filesystem::path& path);

/// Rebuilds a buffer from a CSV dump. Capacity is taken from the row count
/// unless a larger capacity is given.
PrioritizedBuffer load_buffer_csv(const std::filesystem::path& path,
                                  double alpha, double eps,
                                  std::size_t capacity = 0);

}  // namespace pgser
