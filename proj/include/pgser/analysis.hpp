#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pgser/learner.hpp"
#include "pgser/oracle.hpp"
#include "pgser/replay.hpp"

namespace pgser {

enum class QLabel { positive, negative };

/// One scored sample for the separation studies: the Q-value of a transition
/// under either its original goal (positive, from a successful trajectory)
/// or a randomly swapped goal (negative).
struct LabeledQSample {
  double q = 0.0;
  QLabel label = QLabel::negative;
};

/// n_per_class positives drawn from successful trajectories under their own
/// goals, then n_per_class negatives from random goal swaps. When
/// unreachable_only is given, negative swaps are rejected until the swapped
/// goal is unreachable from the transition's state.
std::vector<LabeledQSample> collect_labeled_q(
    const QTable& q, const UniformBuffer& beta, const GoalPool& pool,
    std::size_t n_per_class, RngStream& rng,
    const DistanceOracle* unreachable_only = nullptr);

struct Histogram {
  std::vector<double> edges;  // bins + 1 ascending edges over [-h_max, 0]
  std::vector<std::int64_t> positive;
  std::vector<std::int64_t> negative;
};

/// Shared fixed-width bins over [-h_max, 0]; q = 0 lands in the last bin.
Histogram q_histogram(const std::vector<LabeledQSample>& samples, int bins,
                      int h_max);

/// CSV rows bin_left,bin_right,count_positive,count_negative.
void save_histogram_csv(const Histogram& h, const std::filesystem::path& path);

struct ThresholdFit {
  double threshold = 0.0;
  double train_accuracy = 0.0;
};

/// Best single cut: predict positive iff q >= threshold. Candidates are the
/// midpoints between adjacent distinct values plus one below and one above
/// everything; ties prefer the lowest threshold.
ThresholdFit fit_threshold_classifier(const std::vector<LabeledQSample>& samples);

double threshold_accuracy(const std::vector<LabeledQSample>& samples,
                          double threshold);

struct LogisticFit {
  double weight = 0.0;
  double bias = 0.0;
  double train_accuracy = 0.0;
};

/// Full-batch gradient descent on binary cross-entropy over the single
/// feature q. Inputs are standardized internally; the returned weight and
/// bias act on raw q.
LogisticFit fit_logistic_1d(const std::vector<LabeledQSample>& samples,
                            int steps = 2000, double lr = 0.5);

double logistic_accuracy(const std::vector<LabeledQSample>& samples,
                         const LogisticFit& fit);

struct ClassifierReport {
  ThresholdFit threshold;
  double threshold_holdout_accuracy = 0.0;
  LogisticFit logistic;
  double logistic_holdout_accuracy = 0.0;
  std::size_t n_train = 0;
  std::size_t n_holdout = 0;
};

/// Shuffles, splits in half, fits both classifiers on the first half and
/// scores them on the held-out second half.
ClassifierReport classifier_report(std::vector<LabeledQSample> samples,
                                   RngStream& rng);

/// Welch's unequal-variance t-test. p values come from the t distribution
/// with the Welch-Satterthwaite degrees of freedom.
struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
  /// One-sided p for the alternative mean(a) > mean(b).
  double p_one_sided_greater = 1.0;
};

WelchResult welch_t_test(const std::vector<double>& a,
                         const std::vector<double>& b);

double mean(const std::vector<double>& xs);
/// Sample standard deviation (n - 1 denominator).
double sample_std(const std::vector<double>& xs);

using Policy = std::function<ActionId(StateId, GoalId)>;

struct EvalEntry {
  double mean_reward = 0.0;
  double success_rate = 0.0;
  double mean_length = 0.0;
};

/// Rolls `episodes` episodes on start/goal pairs drawn uniformly over states
/// and goals, rejecting unreachable and already-terminal pairs. Reward
/// counts -1 per step taken, so a full-budget failure scores -h_max.
EvalEntry evaluate_policy(const GCEnvironment& env, const DistanceOracle& oracle,
                          const Policy& policy, int episodes, RngStream& rng);

struct EvalReport {
  std::string variant;
  int episodes = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<EvalEntry> per_seed;

  std::vector<double> mean_rewards() const;
  double aggregate_mean_reward() const;
  double aggregate_std_reward() const;
  double aggregate_success_rate() const;
  double aggregate_mean_length() const;
};

void save_eval_report(const EvalReport& report,
                      const std::filesystem::path& path);
EvalReport load_eval_report(const std::filesystem::path& path);

struct VariantComparison {
  std::string variant_a;
  std::string variant_b;
  double mean_a = 0.0;
  double std_a = 0.0;
  double mean_b = 0.0;
  double std_b = 0.0;
  double t = 0.0;
  double p = 1.0;  // two-sided
};

/// Pairwise Welch tests over per-seed mean rewards, pairs in lexicographic
/// order. Requires at least two seeds per variant.
std::vector<VariantComparison> compare_variants(
    const std::map<std::string, EvalReport>& reports);

void save_significance_csv(const std::vector<VariantComparison>& rows,
                           const std::filesystem::path& path);

}  // namespace pgser
