#include "pgser/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "pgser/dataset.hpp"
#include "pgser/errors.hpp"
#include "pgser/util.hpp"

namespace pgser {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path dataset_path(const ExperimentConfig& c) {
  return c.output_dir / "dataset.jsonl";
}
fs::path pretrained_path(const ExperimentConfig& c) {
  return c.output_dir / "pretrained.qtable";
}
fs::path buffer_path(const ExperimentConfig& c) {
  return c.output_dir / "buffer.csv";
}
fs::path qtable_path(const ExperimentConfig& c, TrainVariant v,
                     std::uint64_t run_seed) {
  return c.output_dir /
         ("qtable_" + to_string(v) + "_s" + std::to_string(run_seed) +
          ".qtable");
}
fs::path eval_report_path(const ExperimentConfig& c, TrainVariant v) {
  return c.output_dir / ("eval_" + to_string(v) + ".json");
}
fs::path significance_path(const ExperimentConfig& c) {
  return c.output_dir / "significance.csv";
}
fs::path qhist_path(const ExperimentConfig& c) {
  return c.output_dir / "qhist.csv";
}
fs::path classify_path(const ExperimentConfig& c) {
  return c.output_dir / "classify.json";
}
fs::path run_manifest_path(const ExperimentConfig& c) {
  return c.output_dir / "run_manifest.json";
}

namespace {

fs::path manifest_path(const ExperimentConfig& c, const std::string& stage) {
  return c.output_dir / "manifests" / ("manifest_" + stage + ".json");
}

/// Flat config keys relevant to a stage: a key survives when it equals a
/// prefix or starts with "<prefix>.".
json config_subset(const ExperimentConfig& c,
                   const std::vector<std::string>& prefixes) {
  const json full = config_to_json(c);
  json out;
  for (const auto& [key, value] : full.items())
    for (const std::string& p : prefixes)
      if (key == p || key.rfind(p + ".", 0) == 0) {
        out[key] = value;
        break;
      }
  return out;
}

std::string stage_key(const std::string& stage, const json& subset,
                      const std::vector<std::pair<std::string, std::string>>&
                          input_hashes) {
  std::string blob = stage + "\n" + subset.dump() + "\n";
  for (const auto& [name, hash] : input_hashes)
    blob += name + "=" + hash + "\n";
  return hash_hex(hash_bytes(blob.data(), blob.size(), detail::kFnvOffset));
}

bool stage_cached(const fs::path& mpath, const std::string& key,
                  const std::vector<fs::path>& outputs) {
  std::error_code ec;
  if (!fs::exists(mpath, ec)) return false;
  json j;
  try {
    j = json::parse(read_text_file(mpath));
  } catch (...) {
    return false;
  }
  if (!j.is_object() || j.value("version", 0) != 1 ||
      j.value("key", std::string()) != key)
    return false;
  for (const fs::path& out : outputs)
    if (!fs::exists(out, ec)) return false;
  return true;
}

void write_stage_manifest(
    const fs::path& mpath, const std::string& stage, const std::string& key,
    const std::vector<std::pair<std::string, std::string>>& input_hashes,
    const std::vector<fs::path>& outputs, double seconds) {
  json inputs = json::object();
  for (const auto& [name, hash] : input_hashes) inputs[name] = hash;
  json outs = json::array();
  for (const fs::path& out : outputs) outs.push_back(out.filename().string());
  json j = {{"stage", stage},       {"key", key},
            {"inputs", inputs},     {"outputs", outs},
            {"wall_clock_s", seconds}, {"version", 1}};
  write_file_atomic(mpath, j.dump(2) + "\n");
}

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void log_stage(std::ostream* log, const std::string& stage,
               const StageOutcome& outcome) {
  if (log == nullptr) return;
  *log << "[" << stage << "] ";
  if (outcome.cached)
    *log << "cached " << outcome.path.filename().string() << "\n";
  else
    *log << "wrote " << outcome.path.filename().string() << " ("
         << outcome.seconds << "s)\n";
  log->flush();
}

std::pair<std::string, std::string> input_hash(const fs::path& path) {
  return {path.filename().string(), file_hash_hex(path)};
}

/// Runs `body` with uniform caching, logging and error wrapping.
template <typename Body>
StageOutcome run_stage(const ExperimentConfig& c, const std::string& stage,
                       const json& subset,
                       const std::vector<fs::path>& inputs,
                       const std::vector<fs::path>& outputs,
                       std::ostream* log, Body body) {
  std::vector<std::pair<std::string, std::string>> hashes;
  for (const fs::path& in : inputs) {
    std::error_code ec;
    if (!fs::exists(in, ec))
      throw MissingArtifactError("stage " + stage + ": missing input " +
                                 in.string());
    hashes.push_back(input_hash(in));
  }
  const std::string key = stage_key(stage, subset, hashes);
  const fs::path mpath = manifest_path(c, stage);
  StageOutcome outcome{outputs.front(), false, 0.0};
  if (stage_cached(mpath, key, outputs)) {
    outcome.cached = true;
    log_stage(log, stage, outcome);
    return outcome;
  }
  const auto start = Clock::now();
  try {
    body();
  } catch (const ConfigError&) {
    throw;
  } catch (const MissingArtifactError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("stage " + stage + ": " + e.what());
  }
  outcome.seconds = elapsed_s(start);
  write_stage_manifest(mpath, stage, key, hashes, outputs, outcome.seconds);
  log_stage(log, stage, outcome);
  return outcome;
}

struct LoadedDataset {
  GridEnv env;
  OfflineDataset data;
  UniformBuffer beta;
  GoalPool pool;
};

LoadedDataset load_inputs(const ExperimentConfig& c) {
  OfflineDataset data = load_dataset(dataset_path(c));
  GridEnv env = build_env(c.env_spec, c.h_max);
  if (!(data.env_spec == env.spec()))
    throw StageError("dataset geometry disagrees with the config");
  UniformBuffer beta = UniformBuffer::from_dataset(data.trajectories);
  GoalPool pool = GoalPool::from_dataset(env, data.trajectories);
  return {std::move(env), std::move(data), std::move(beta), std::move(pool)};
}

QTable load_matching_qtable(const fs::path& path, const GCEnvironment& env) {
  QTable q = load_qtable(path);
  if (q.num_states() != env.num_states() || q.num_goals() != env.num_goals() ||
      q.num_actions() != env.num_actions() || q.h_max() != env.horizon())
    throw StageError("qtable " + path.string() +
                     " does not match the configured environment");
  return q;
}

std::vector<LabeledQSample> analysis_samples(const ExperimentConfig& c,
                                             const LoadedDataset& in,
                                             const QTable& frozen,
                                             RngStream& rng) {
  DistanceOracle oracle;
  const DistanceOracle* filter = nullptr;
  if (c.analysis_unreachable_only) {
    oracle = build_oracle(in.env);
    filter = &oracle;
  }
  return collect_labeled_q(frozen, in.beta, in.pool,
                           c.analysis_samples_per_class, rng, filter);
}

}  // namespace

StageOutcome run_gen_data(const ExperimentConfig& c, std::ostream* log) {
  const fs::path out = dataset_path(c);
  return run_stage(
      c, "gen_data", config_subset(c, {"seed", "env", "dataset"}), {}, {out},
      log, [&] {
        const GridEnv env = build_env(c.env_spec, c.h_max);
        const DistanceOracle oracle = build_oracle(env);
        const GenRequest req{c.n_expert, c.n_random, c.noise};
        const OfflineDataset ds = generate_dataset(
            env, oracle, req, derive_seed(c.seed, "dataset"));
        save_dataset(ds, out);
      });
}

StageOutcome run_pretrain(const ExperimentConfig& c, std::ostream* log) {
  const fs::path out = pretrained_path(c);
  return run_stage(
      c, "pretrain", config_subset(c, {"seed", "env", "pretrain"}),
      {dataset_path(c)}, {out}, log, [&] {
        const LoadedDataset in = load_inputs(c);
        TrainSchedule schedule;
        schedule.updates = c.pretrain.updates;
        schedule.batch_size = c.pretrain.batch_size;
        schedule.learning_rate = c.pretrain.learning_rate;
        schedule.rho = c.pretrain.rho;
        schedule.her_ratio = c.pretrain.her_ratio;
        schedule.rng_seed = derive_seed(c.seed, "pretrain");
        const QTable q = pretrain_q(in.env, in.beta, in.pool, schedule);
        save_qtable(q, out);
      });
}

StageOutcome run_fill_buffer(const ExperimentConfig& c, std::ostream* log) {
  const fs::path out = buffer_path(c);
  return run_stage(
      c, "fill_buffer", config_subset(c, {"seed", "env", "buffer"}),
      {dataset_path(c), pretrained_path(c)}, {out}, log, [&] {
        const LoadedDataset in = load_inputs(c);
        const QTable frozen = load_matching_qtable(pretrained_path(c), in.env);
        const std::size_t capacity =
            resolve_buffer_capacity(c, count_transitions(in.data));
        RngStream rng(derive_seed(c.seed, "buffer"));
        const PrioritizedBuffer buffer =
            fill_priority_buffer(frozen, in.env, in.beta, in.pool, capacity,
                                 c.buffer_alpha, c.buffer_eps, rng);
        save_buffer_csv(buffer, out);
      });
}

StageOutcome run_train_one(const ExperimentConfig& c, TrainVariant v,
                           std::uint64_t run_seed, std::ostream* log) {
  const fs::path out = qtable_path(c, v, run_seed);
  const std::string stage =
      "train_" + to_string(v) + "_s" + std::to_string(run_seed);

  std::vector<std::string> prefixes{"seed", "env", "train"};
  std::vector<fs::path> inputs{dataset_path(c)};
  if (v == TrainVariant::mem) {
    prefixes.push_back("buffer");
    inputs.push_back(buffer_path(c));
  }
  if (c.warm_start) inputs.push_back(pretrained_path(c));
  json subset = config_subset(c, prefixes);
  subset["run.variant"] = to_string(v);
  subset["run.seed"] = run_seed;

  return run_stage(c, stage, subset, inputs, {out}, log, [&] {
    const LoadedDataset in = load_inputs(c);
    TrainSchedule schedule;
    schedule.updates = c.train.updates;
    schedule.batch_size = c.train.batch_size;
    schedule.learning_rate = c.train.learning_rate;
    schedule.rho = c.train.rho;
    schedule.her_ratio = c.train.her_ratio;
    schedule.rng_seed =
        derive_seed(c.seed, "train/" + to_string(v), run_seed);
    schedule.kind = c.train_kind;
    schedule.warm_start = c.warm_start;

    std::optional<PrioritizedBuffer> beta_aug;
    if (v == TrainVariant::mem) {
      const std::size_t capacity =
          resolve_buffer_capacity(c, count_transitions(in.data));
      beta_aug.emplace(load_buffer_csv(buffer_path(c), c.buffer_alpha,
                                       c.buffer_eps, capacity));
    }
    std::optional<QTable> pretrained;
    if (c.warm_start)
      pretrained.emplace(load_matching_qtable(pretrained_path(c), in.env));

    const TrainResult result = train_agent(
        in.env, in.beta, in.pool, schedule, v,
        beta_aug.has_value() ? &*beta_aug : nullptr,
        pretrained.has_value() ? &*pretrained : nullptr);
    save_qtable(result.q, out);
  });
}

namespace {

void run_tasks_parallel(
    const std::vector<std::pair<TrainVariant, std::uint64_t>>& tasks,
    const ExperimentConfig& c, int jobs, std::ostream* log) {
  const std::size_t n_workers = std::max(
      1, std::min(jobs, static_cast<int>(tasks.size())));
  if (n_workers <= 1) {
    for (const auto& [v, seed] : tasks) run_train_one(c, v, seed, log);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;  // serializes logging and error capture
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::scoped_lock lock(mu);
        if (first_error) return;
      }
      try {
        std::ostringstream local;
        const auto outcome =
            run_train_one(c, tasks[i].first, tasks[i].second,
                          log != nullptr ? &local : nullptr);
        (void)outcome;
        if (log != nullptr) {
          std::scoped_lock lock(mu);
          *log << local.str();
          log->flush();
        }
      } catch (...) {
        std::scoped_lock lock(mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

void run_train(const ExperimentConfig& c, int jobs, std::ostream* log) {
  std::vector<std::pair<TrainVariant, std::uint64_t>> tasks;
  for (const std::uint64_t seed : c.eval_seeds)
    tasks.emplace_back(c.variant, seed);
  run_tasks_parallel(tasks, c, jobs, log);
}

StageOutcome run_evaluate(const ExperimentConfig& c, TrainVariant v,
                          std::ostream* log) {
  const fs::path out = eval_report_path(c, v);
  const std::string stage = "evaluate_" + to_string(v);
  std::vector<fs::path> inputs;
  for (const std::uint64_t seed : c.eval_seeds)
    inputs.push_back(qtable_path(c, v, seed));
  json subset = config_subset(c, {"seed", "env", "eval"});
  subset["run.variant"] = to_string(v);

  return run_stage(c, stage, subset, inputs, {out}, log, [&] {
    const GridEnv env = build_env(c.env_spec, c.h_max);
    const DistanceOracle oracle = build_oracle(env);
    EvalReport report;
    report.variant = to_string(v);
    report.episodes = c.eval_episodes;
    report.seeds = c.eval_seeds;
    for (const std::uint64_t seed : c.eval_seeds) {
      const QTable q = load_matching_qtable(qtable_path(c, v, seed), env);
      const GreedyPolicy policy{&q};
      // Same eval stream for every variant, so all variants face the same
      // episode set at the same seed.
      RngStream rng(derive_seed(c.seed, "eval", seed));
      report.per_seed.push_back(
          evaluate_policy(env, oracle, policy, c.eval_episodes, rng));
    }
    save_eval_report(report, out);
  });
}

StageOutcome run_compare(const ExperimentConfig& c, std::ostream* log) {
  const fs::path out = significance_path(c);
  const std::vector<TrainVariant> variants{
      TrainVariant::baseline, TrainVariant::mem, TrainVariant::swap};
  std::vector<fs::path> inputs;
  for (const TrainVariant v : variants)
    inputs.push_back(eval_report_path(c, v));

  return run_stage(c, "compare", config_subset(c, {"eval"}), inputs, {out},
                   log, [&] {
                     std::map<std::string, EvalReport> reports;
                     for (const TrainVariant v : variants)
                       reports[to_string(v)] =
                           load_eval_report(eval_report_path(c, v));
                     save_significance_csv(compare_variants(reports), out);
                   });
}

StageOutcome run_qhist(const ExperimentConfig& c, std::ostream* log) {
  const fs::path out = qhist_path(c);
  return run_stage(
      c, "qhist", config_subset(c, {"seed", "env", "analysis"}),
      {dataset_path(c), pretrained_path(c)}, {out}, log, [&] {
        const LoadedDataset in = load_inputs(c);
        const QTable frozen = load_matching_qtable(pretrained_path(c), in.env);
        RngStream rng(derive_seed(c.seed, "analysis"));
        const auto samples = analysis_samples(c, in, frozen, rng);
        save_histogram_csv(q_histogram(samples, c.analysis_bins, c.h_max),
                           out);
      });
}

StageOutcome run_classify(const ExperimentConfig& c, std::ostream* log) {
  const fs::path out = classify_path(c);
  return run_stage(
      c, "classify", config_subset(c, {"seed", "env", "analysis"}),
      {dataset_path(c), pretrained_path(c)}, {out}, log, [&] {
        const LoadedDataset in = load_inputs(c);
        const QTable frozen = load_matching_qtable(pretrained_path(c), in.env);
        RngStream rng(derive_seed(c.seed, "analysis"));
        const auto samples = analysis_samples(c, in, frozen, rng);
        const ClassifierReport report = classifier_report(samples, rng);
        json j;
        j["n_per_class"] = c.analysis_samples_per_class;
        j["unreachable_only"] = c.analysis_unreachable_only;
        j["threshold"] = report.threshold.threshold;
        j["threshold_train_accuracy"] = report.threshold.train_accuracy;
        j["threshold_holdout_accuracy"] = report.threshold_holdout_accuracy;
        j["logistic_weight"] = report.logistic.weight;
        j["logistic_bias"] = report.logistic.bias;
        j["logistic_train_accuracy"] = report.logistic.train_accuracy;
        j["logistic_holdout_accuracy"] = report.logistic_holdout_accuracy;
        j["n_train"] = report.n_train;
        j["n_holdout"] = report.n_holdout;
        write_file_atomic(out, j.dump(2) + "\n");
      });
}

void run_pipeline(const ExperimentConfig& c, int jobs, std::ostream* log) {
  const auto start = Clock::now();
  run_gen_data(c, log);
  run_pretrain(c, log);
  run_fill_buffer(c, log);

  const std::vector<TrainVariant> variants{
      TrainVariant::baseline, TrainVariant::swap, TrainVariant::mem};
  std::vector<std::pair<TrainVariant, std::uint64_t>> tasks;
  for (const TrainVariant v : variants)
    for (const std::uint64_t seed : c.eval_seeds) tasks.emplace_back(v, seed);
  run_tasks_parallel(tasks, c, jobs, log);

  for (const TrainVariant v : variants) run_evaluate(c, v, log);
  run_compare(c, log);

  json artifacts = json::array();
  artifacts.push_back(dataset_path(c).filename().string());
  artifacts.push_back(pretrained_path(c).filename().string());
  artifacts.push_back(buffer_path(c).filename().string());
  for (const TrainVariant v : variants) {
    for (const std::uint64_t seed : c.eval_seeds)
      artifacts.push_back(qtable_path(c, v, seed).filename().string());
    artifacts.push_back(eval_report_path(c, v).filename().string());
  }
  artifacts.push_back(significance_path(c).filename().string());
  json manifest = {{"config", config_to_json(c)},
                   {"config_hash", config_hash(c)},
                   {"seed", c.seed},
                   {"artifacts", artifacts},
                   {"wall_clock_s", elapsed_s(start)},
                   {"version", 1}};
  write_file_atomic(run_manifest_path(c), manifest.dump(2) + "\n");
  if (log != nullptr) {
    *log << "[pipeline] done in " << elapsed_s(start) << "s\n";
    log->flush();
  }
}

}  // namespace pgser
