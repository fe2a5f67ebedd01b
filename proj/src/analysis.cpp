#include "pgser/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pgser/errors.hpp"
#include "pgser/util.hpp"

namespace pgser {

using nlohmann::json;

std::vector<LabeledQSample> collect_labeled_q(
    const QTable& q, const UniformBuffer& beta, const GoalPool& pool,
    std::size_t n_per_class, RngStream& rng,
    const DistanceOracle* unreachable_only) {
  std::vector<std::size_t> successful;
  for (std::size_t i = 0; i < beta.size(); ++i)
    if (beta.trajectory_success(beta.position(i).trajectory))
      successful.push_back(i);
  if (successful.empty())
    throw StageError("collect_labeled_q: dataset has no successful trajectory");
  if (pool.size() == 0)
    throw StageError("collect_labeled_q: empty goal pool");

  std::vector<LabeledQSample> out;
  out.reserve(2 * n_per_class);
  for (std::size_t i = 0; i < n_per_class; ++i) {
    const GCTransition& t = beta[successful[rng.next_index(successful.size())]];
    out.push_back({q.at(t.state, t.goal, t.action), QLabel::positive});
  }
  const std::size_t max_attempts = std::max<std::size_t>(n_per_class, 1) * 1000;
  std::size_t attempts = 0;
  std::size_t collected = 0;
  while (collected < n_per_class) {
    if (++attempts > max_attempts)
      throw StageError(
          "collect_labeled_q: could not draw enough unreachable goal swaps; "
          "is the environment fully connected?");
    const GCTransition& t = beta[rng.next_index(beta.size())];
    const GoalId g = pool.sample(rng);
    if (unreachable_only != nullptr && unreachable_only->reachable(t.state, g))
      continue;
    out.push_back({q.at(t.state, g, t.action), QLabel::negative});
    ++collected;
  }
  return out;
}

Histogram q_histogram(const std::vector<LabeledQSample>& samples, int bins,
                      int h_max) {
  if (bins < 2) throw std::invalid_argument("q_histogram: bins must be >= 2");
  if (h_max < 1) throw std::invalid_argument("q_histogram: h_max must be >= 1");
  Histogram h;
  const double width = static_cast<double>(h_max) / bins;
  for (int i = 0; i <= bins; ++i)
    h.edges.push_back(-static_cast<double>(h_max) + i * width);
  h.edges.back() = 0.0;
  h.positive.assign(bins, 0);
  h.negative.assign(bins, 0);
  for (const LabeledQSample& s : samples) {
    if (s.q < -static_cast<double>(h_max) || s.q > 0.0)
      throw std::invalid_argument("q_histogram: sample outside [-h_max, 0]");
    int idx = static_cast<int>(std::floor((s.q + h_max) / width));
    idx = std::clamp(idx, 0, bins - 1);
    (s.label == QLabel::positive ? h.positive : h.negative)[idx] += 1;
  }
  return h;
}

void save_histogram_csv(const Histogram& h, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "bin_left,bin_right,count_positive,count_negative\n";
  for (std::size_t i = 0; i + 1 < h.edges.size(); ++i)
    out << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1])
        << ',' << h.positive[i] << ',' << h.negative[i] << '\n';
  write_file_atomic(path, out.str());
}

double threshold_accuracy(const std::vector<LabeledQSample>& samples,
                          double threshold) {
  if (samples.empty())
    throw std::invalid_argument("threshold_accuracy: no samples");
  std::size_t correct = 0;
  for (const LabeledQSample& s : samples) {
    const bool positive = s.q >= threshold;
    if (positive == (s.label == QLabel::positive)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

ThresholdFit fit_threshold_classifier(
    const std::vector<LabeledQSample>& samples) {
  bool has_pos = false;
  bool has_neg = false;
  for (const LabeledQSample& s : samples)
    (s.label == QLabel::positive ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw std::invalid_argument(
        "fit_threshold_classifier: need both classes present");

  std::vector<double> values;
  values.reserve(samples.size());
  for (const LabeledQSample& s : samples) values.push_back(s.q);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> candidates;
  candidates.push_back(values.front() - 1.0);
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    candidates.push_back(0.5 * (values[i] + values[i + 1]));
  candidates.push_back(values.back() + 1.0);

  ThresholdFit best{candidates.front(), -1.0};
  for (const double theta : candidates) {
    const double acc = threshold_accuracy(samples, theta);
    if (acc > best.train_accuracy) best = {theta, acc};
  }
  return best;
}

namespace {
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

LogisticFit fit_logistic_1d(const std::vector<LabeledQSample>& samples,
                            int steps, double lr) {
  if (samples.empty())
    throw std::invalid_argument("fit_logistic_1d: no samples");

  const auto n = static_cast<double>(samples.size());
  double mean_q = 0.0;
  for (const LabeledQSample& s : samples) mean_q += s.q;
  mean_q /= n;
  double var_q = 0.0;
  for (const LabeledQSample& s : samples)
    var_q += (s.q - mean_q) * (s.q - mean_q);
  const double sd = var_q > 0.0 ? std::sqrt(var_q / n) : 1.0;

  double w = 0.0;
  double b = 0.0;
  for (int step = 0; step < steps; ++step) {
    double gw = 0.0;
    double gb = 0.0;
    for (const LabeledQSample& s : samples) {
      const double z = (s.q - mean_q) / sd;
      const double err =
          sigmoid(w * z + b) - (s.label == QLabel::positive ? 1.0 : 0.0);
      gw += err * z;
      gb += err;
    }
    w -= lr * gw / n;
    b -= lr * gb / n;
  }

  LogisticFit fit;
  fit.weight = w / sd;
  fit.bias = b - w * mean_q / sd;
  fit.train_accuracy = logistic_accuracy(samples, fit);
  return fit;
}

double logistic_accuracy(const std::vector<LabeledQSample>& samples,
                         const LogisticFit& fit) {
  if (samples.empty())
    throw std::invalid_argument("logistic_accuracy: no samples");
  std::size_t correct = 0;
  for (const LabeledQSample& s : samples) {
    const bool positive = fit.weight * s.q + fit.bias >= 0.0;
    if (positive == (s.label == QLabel::positive)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

ClassifierReport classifier_report(std::vector<LabeledQSample> samples,
                                   RngStream& rng) {
  if (samples.size() < 4)
    throw std::invalid_argument("classifier_report: need at least 4 samples");
  for (std::size_t i = samples.size() - 1; i > 0; --i)
    std::swap(samples[i], samples[rng.next_index(i + 1)]);
  const std::size_t half = samples.size() / 2;
  const std::vector<LabeledQSample> train(samples.begin(),
                                          samples.begin() + half);
  const std::vector<LabeledQSample> holdout(samples.begin() + half,
                                            samples.end());
  ClassifierReport report;
  report.threshold = fit_threshold_classifier(train);
  report.threshold_holdout_accuracy =
      threshold_accuracy(holdout, report.threshold.threshold);
  report.logistic = fit_logistic_1d(train);
  report.logistic_holdout_accuracy = logistic_accuracy(holdout, report.logistic);
  report.n_train = train.size();
  report.n_holdout = holdout.size();
  return report;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double m = 0.0;
  for (double x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_std: need n >= 2");
  const double m = mean(xs);
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return std::sqrt(v / static_cast<double>(xs.size() - 1));
}

WelchResult welch_t_test(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_t_test: need at least two values per side");
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const double ma = mean(a);
  const double mb = mean(b);
  const double sa = sample_std(a);
  const double sb = sample_std(b);
  const double va = sa * sa;
  const double vb = sb * sb;
  const double se2 = va / na + vb / nb;

  WelchResult r;
  if (se2 == 0.0) {
    // Zero variance on both sides: identical constants give p = 1, distinct
    // constants are infinitely separated.
    r.df = na + nb - 2.0;
    if (ma == mb) {
      r.t = 0.0;
      r.p_two_sided = 1.0;
      r.p_one_sided_greater = 0.5;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
      r.p_two_sided = 0.0;
      r.p_one_sided_greater = ma > mb ? 0.0 : 1.0;
    }
    return r;
  }

  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 /
         ((va / na) * (va / na) / (na - 1.0) +
          (vb / nb) * (vb / nb) / (nb - 1.0));
  const boost::math::students_t dist(r.df);
  r.p_two_sided = 2.0 * boost::math::cdf(dist, -std::abs(r.t));
  // P(T >= t) under the null, small when mean(a) is convincingly larger.
  r.p_one_sided_greater = boost::math::cdf(dist, -r.t);
  return r;
}

EvalEntry evaluate_policy(const GCEnvironment& env, const DistanceOracle& oracle,
                          const Policy& policy, int episodes, RngStream& rng) {
  if (episodes < 1)
    throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
  if (!oracle.has_valid_pair())
    throw std::invalid_argument(
        "evaluate_policy: environment has no reachable start/goal pair");
  double total_reward = 0.0;
  double total_length = 0.0;
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    StateId s;
    GoalId g;
    do {
      s = static_cast<StateId>(rng.next_index(env.num_states()));
      g = static_cast<GoalId>(rng.next_index(env.num_goals()));
    } while (oracle.distance(s, g) <= 0);
    int steps = 0;
    while (steps < env.horizon() && !is_terminal(env, s, g)) {
      s = env.step(s, policy(s, g));
      ++steps;
    }
    const bool success = is_terminal(env, s, g);
    total_reward += -static_cast<double>(steps);
    total_length += steps;
    successes += success ? 1 : 0;
  }
  EvalEntry entry;
  entry.mean_reward = total_reward / episodes;
  entry.success_rate = static_cast<double>(successes) / episodes;
  entry.mean_length = total_length / episodes;
  return entry;
}

std::vector<double> EvalReport::mean_rewards() const {
  std::vector<double> out;
  out.reserve(per_seed.size());
  for (const EvalEntry& e : per_seed) out.push_back(e.mean_reward);
  return out;
}

double EvalReport::aggregate_mean_reward() const { return mean(mean_rewards()); }

double EvalReport::aggregate_std_reward() const {
  return sample_std(mean_rewards());
}

double EvalReport::aggregate_success_rate() const {
  std::vector<double> xs;
  for (const EvalEntry& e : per_seed) xs.push_back(e.success_rate);
  return mean(xs);
}

double EvalReport::aggregate_mean_length() const {
  std::vector<double> xs;
  for (const EvalEntry& e : per_seed) xs.push_back(e.mean_length);
  return mean(xs);
}

void save_eval_report(const EvalReport& report,
                      const std::filesystem::path& path) {
  json j;
  j["variant"] = report.variant;
  j["episodes"] = report.episodes;
  j["seeds"] = report.seeds;
  json mr = json::array();
  json sr = json::array();
  json ml = json::array();
  for (const EvalEntry& e : report.per_seed) {
    mr.push_back(e.mean_reward);
    sr.push_back(e.success_rate);
    ml.push_back(e.mean_length);
  }
  j["per_seed_mean_reward"] = std::move(mr);
  j["per_seed_success_rate"] = std::move(sr);
  j["per_seed_mean_length"] = std::move(ml);
  j["aggregate"] = {{"mean_reward", report.aggregate_mean_reward()},
                    {"std_reward", report.aggregate_std_reward()},
                    {"success_rate", report.aggregate_success_rate()},
                    {"mean_length", report.aggregate_mean_length()}};
  write_file_atomic(path, j.dump(2) + "\n");
}

EvalReport load_eval_report(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  EvalReport report;
  try {
    const json j = json::parse(text);
    report.variant = j.at("variant").get<std::string>();
    report.episodes = j.at("episodes").get<int>();
    report.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    const auto mr = j.at("per_seed_mean_reward").get<std::vector<double>>();
    const auto sr = j.at("per_seed_success_rate").get<std::vector<double>>();
    const auto ml = j.at("per_seed_mean_length").get<std::vector<double>>();
    if (mr.size() != sr.size() || mr.size() != ml.size() ||
        mr.size() != report.seeds.size())
      throw ParseError("eval report " + path.string() +
                       ": per-seed arrays disagree in length");
    for (std::size_t i = 0; i < mr.size(); ++i)
      report.per_seed.push_back({mr[i], sr[i], ml[i]});
  } catch (const json::exception& e) {
    throw ParseError("eval report " + path.string() + ": " + e.what());
  }
  return report;
}

std::vector<VariantComparison> compare_variants(
    const std::map<std::string, EvalReport>& reports) {
  if (reports.size() < 2)
    throw std::invalid_argument("compare_variants: need at least two variants");
  std::vector<VariantComparison> out;
  for (auto ia = reports.begin(); ia != reports.end(); ++ia)
    for (auto ib = std::next(ia); ib != reports.end(); ++ib) {
      const auto ra = ia->second.mean_rewards();
      const auto rb = ib->second.mean_rewards();
      const WelchResult w = welch_t_test(ra, rb);
      VariantComparison row;
      row.variant_a = ia->first;
      row.variant_b = ib->first;
      row.mean_a = mean(ra);
      row.std_a = sample_std(ra);
      row.mean_b = mean(rb);
      row.std_b = sample_std(rb);
      row.t = w.t;
      row.p = w.p_two_sided;
      out.push_back(row);
    }
  return out;
}

void save_significance_csv(const std::vector<VariantComparison>& rows,
                           const std::filesystem::path& path) {
  std::ostringstream out;
  out << "variant_a,variant_b,mean_a,std_a,mean_b,std_b,t,p\n";
  for (const VariantComparison& r : rows)
    out << r.variant_a << ',' << r.variant_b << ',' << format_double(r.mean_a)
        << ',' << format_double(r.std_a) << ',' << format_double(r.mean_b)
        << ',' << format_double(r.std_b) << ',' << format_double(r.t) << ','
        << format_double(r.p) << '\n';
  write_file_atomic(path, out.str());
}

}  // namespace pgser
