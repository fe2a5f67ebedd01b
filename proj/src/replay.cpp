#include "pgser/replay.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pgser/errors.hpp"
#include "pgser/util.hpp"

namespace pgser {

UniformBuffer UniformBuffer::from_dataset(
    const std::vector<Trajectory>& trajectories) {
  UniformBuffer buf;
  for (std::size_t ti = 0; ti < trajectories.size(); ++ti) {
    const Trajectory& traj = trajectories[ti];
    buf.lengths_.push_back(traj.steps.size());
    buf.success_.push_back(traj.success ? 1 : 0);
    for (std::size_t si = 0; si < traj.steps.size(); ++si) {
      buf.items_.push_back(traj.steps[si]);
      buf.positions_.push_back(
          {static_cast<std::int32_t>(ti), static_cast<std::int32_t>(si)});
    }
  }
  return buf;
}

double priority_from_q(double q, int h_max, double alpha, double eps) {
  if (!(q >= -static_cast<double>(h_max) && q <= 0.0))
    throw std::domain_error("priority_from_q: q outside [-h_max, 0]");
  const double shifted = (q + h_max) / h_max + eps;
  return std::pow(shifted, alpha);
}

PrioritizedBuffer::PrioritizedBuffer(std::size_t capacity, double alpha,
                                     double eps)
    : capacity_(capacity), alpha_(alpha), eps_(eps), tree_(capacity) {
  if (capacity == 0)
    throw std::invalid_argument("PrioritizedBuffer: capacity must be positive");
  items_.reserve(capacity);
}

const AugmentedTransition& PrioritizedBuffer::item(std::size_t slot) const {
  if (slot >= items_.size())
    throw std::out_of_range("PrioritizedBuffer::item");
  return items_[slot];
}

double PrioritizedBuffer::priority(std::size_t slot) const {
  if (slot >= items_.size())
    throw std::out_of_range("PrioritizedBuffer::priority");
  return tree_.get(slot);
}

std::size_t PrioritizedBuffer::insert(const AugmentedTransition& item,
                                      double priority) {
  if (!(priority > 0.0) || std::isinf(priority))
    throw std::invalid_argument(
        "PrioritizedBuffer::insert: priority must be finite and positive");
  std::size_t slot;
  if (items_.size() < capacity_) {
    slot = items_.size();
    items_.push_back(item);
  } else {
    slot = 0;  // overwrite the lowest-priority item
    for (std::size_t i = 1; i < items_.size(); ++i)
      if (tree_.get(i) < tree_.get(slot)) slot = i;
    items_[slot] = item;
  }
  tree_.set(slot, priority);
  return slot;
}

void PrioritizedBuffer::update_priority(std::size_t slot, double priority) {
  if (slot >= items_.size())
    throw std::out_of_range("PrioritizedBuffer::update_priority");
  if (!(priority > 0.0) || std::isinf(priority))
    throw std::invalid_argument(
        "PrioritizedBuffer::update_priority: priority must be finite and "
        "positive");
  tree_.set(slot, priority);
}

std::size_t PrioritizedBuffer::sample_index(RngStream& rng) const {
  if (items_.empty())
    throw std::invalid_argument("PrioritizedBuffer::sample_index: empty buffer");
  const double u = rng.next_double() * tree_.total();
  std::size_t slot = tree_.find_prefix(u);
  // Unoccupied leaves carry zero mass; a draw can only land there through
  // floating-point edge rounding, so clamp to the last occupied slot.
  if (slot >= items_.size()) slot = items_.size() - 1;
  return slot;
}

std::vector<std::size_t> PrioritizedBuffer::sample(std::size_t n,
                                                   RngStream& rng) const {
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_index(rng));
  return out;
}

GCTransition her_relabel(const GCEnvironment& env, const UniformBuffer& buffer,
                         std::size_t index, RngStream& rng) {
  if (index >= buffer.size())
    throw std::out_of_range("her_relabel: index");
  const auto pos = buffer.position(index);
  const std::size_t length = buffer.trajectory_length(pos.trajectory);
  const std::size_t remaining = length - static_cast<std::size_t>(pos.step);
  const std::size_t offset = rng.next_index(remaining);
  const std::size_t future = index + offset;  // same trajectory, stored flat
  const GoalId achieved = env.goal_of(buffer[future].next_state);
  return goal_swap(env, buffer[index], achieved).effective();
}

namespace {

GCTransition draw_dataset_item(const GCEnvironment& env,
                               const UniformBuffer& beta, double her_ratio,
                               RngStream& rng, SampleStats* stats) {
  const std::size_t i = rng.next_index(beta.size());
  if (stats) ++stats->from_dataset;
  if (rng.bernoulli(her_ratio)) {
    if (stats) ++stats->her_relabels;
    return her_relabel(env, beta, i, rng);
  }
  return beta[i];
}

}  // namespace

std::vector<GCTransition> mixed_sample(const GCEnvironment& env,
                                       const UniformBuffer& beta,
                                       const PrioritizedBuffer& beta_aug,
                                       std::size_t batch, double rho,
                                       double her_ratio, RngStream& rng,
                                       SampleStats* stats) {
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("mixed_sample: rho must be within [0, 1]");
  if (beta.size() == 0)
    throw std::invalid_argument("mixed_sample: empty dataset buffer");
  const auto n_aug = static_cast<std::size_t>(
      std::floor(rho * static_cast<double>(batch)));
  if (n_aug > 0 && beta_aug.size() == 0)
    throw std::invalid_argument("mixed_sample: empty priority buffer");
  std::vector<GCTransition> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < n_aug; ++i) {
    out.push_back(beta_aug.item(beta_aug.sample_index(rng)).effective());
    if (stats) ++stats->from_augmented;
  }
  for (std::size_t i = n_aug; i < batch; ++i)
    out.push_back(draw_dataset_item(env, beta, her_ratio, rng, stats));
  return out;
}

std::vector<GCTransition> mixed_sample_swap(const GCEnvironment& env,
                                            const UniformBuffer& beta,
                                            const GoalPool& pool,
                                            std::size_t batch, double rho,
                                            double her_ratio, RngStream& rng,
                                            SampleStats* stats) {
  if (rho < 0.0 || rho > 1.0)
    throw std::invalid_argument("mixed_sample_swap: rho must be within [0, 1]");
  if (beta.size() == 0)
    throw std::invalid_argument("mixed_sample_swap: empty dataset buffer");
  const auto n_aug = static_cast<std::size_t>(
      std::floor(rho * static_cast<double>(batch)));
  std::vector<GCTransition> out;
  out.reserve(batch);
  if (n_aug > 0) {
    for (auto& aug : sample_swap_batch(env, beta, pool, n_aug, rng)) {
      out.push_back(aug.effective());
      if (stats) ++stats->from_augmented;
    }
  }
  for (std::size_t i = n_aug; i < batch; ++i)
    out.push_back(draw_dataset_item(env, beta, her_ratio, rng, stats));
  return out;
}

void save_buffer_csv(const PrioritizedBuffer& buffer,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out << "s,g,a,r,s_next,done,priority\n";
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const GCTransition t = buffer.item(i).effective();
    out << t.state << ',' << t.goal << ',' << t.action << ',' << t.reward
        << ',' << t.next_state << ',' << (t.done ? 1 : 0) << ','
        << format_double(buffer.priority(i)) << '\n';
  }
  write_file_atomic(path, out.str());
}

PrioritizedBuffer load_buffer_csv(const std::filesystem::path& path,
                                  double alpha, double eps,
                                  std::size_t capacity) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "s,g,a,r,s_next,done,priority")
    throw ParseError("buffer csv line 1: bad header");

  struct Row {
    AugmentedTransition item;
    double priority;
  };
  std::vector<Row> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Row row;
    GCTransition t;
    int done = 0;
    char comma = 0;
    std::istringstream fields(line);
    fields >> t.state >> comma >> t.goal >> comma >> t.action >> comma >>
        t.reward >> comma >> t.next_state >> comma >> done >> comma >>
        row.priority;
    if (!fields || (done != 0 && done != 1))
      throw ParseError("buffer csv line " + std::to_string(lineno) +
                       ": malformed row");
    t.done = done == 1;
    // The dump stores effective transitions; reloading keeps them as their
    // own base, which preserves learner-visible behavior exactly.
    row.item.base = t;
    row.item.swapped_goal = t.goal;
    row.item.reward = t.reward;
    row.item.done = t.done;
    rows.push_back(row);
  }
  if (rows.empty())
    throw ParseError("buffer csv: no rows");
  PrioritizedBuffer buffer(std::max(capacity, rows.size()), alpha, eps);
  for (const Row& row : rows) buffer.insert(row.item, row.priority);
  return buffer;
}

}  // namespace pgser
