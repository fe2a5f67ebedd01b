#include "pgser/config.hpp"

#include <set>

#include "pgser/errors.hpp"
#include "pgser/util.hpp"

namespace pgser {

using nlohmann::json;

namespace {

class KeyReader {
 public:
  explicit KeyReader(const json& j) : j_(j) {
    if (!j.is_object())
      throw ConfigError("config: top level must be a JSON object");
  }

  template <typename T>
  T get(const std::string& key, const T& fallback) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return fallback;
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key \"" + key + "\": wrong type");
    }
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end())
      throw ConfigError("config key \"" + key + "\": missing");
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key \"" + key + "\": wrong type");
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.contains(key))
        throw ConfigError("config key \"" + key + "\": unknown");
  }

 private:
  const json& j_;
  std::set<std::string> seen_;
};

ScheduleConfig read_schedule(KeyReader& r, const std::string& prefix,
                             const ScheduleConfig& defaults) {
  ScheduleConfig s;
  s.updates = r.get<int>(prefix + ".updates", defaults.updates);
  s.batch_size = r.get<int>(prefix + ".batch_size", defaults.batch_size);
  s.learning_rate =
      r.get<double>(prefix + ".learning_rate", defaults.learning_rate);
  s.rho = r.get<double>(prefix + ".rho", defaults.rho);
  s.her_ratio = r.get<double>(prefix + ".her_ratio", defaults.her_ratio);
  return s;
}

void check_schedule(const ScheduleConfig& s, const std::string& prefix) {
  if (s.updates < 0) throw ConfigError(prefix + ".updates: must be >= 0");
  if (s.batch_size < 1) throw ConfigError(prefix + ".batch_size: must be >= 1");
  if (s.learning_rate <= 0.0 || s.learning_rate > 1.0)
    throw ConfigError(prefix + ".learning_rate: must be within (0, 1]");
  if (s.rho < 0.0 || s.rho > 1.0)
    throw ConfigError(prefix + ".rho: must be within [0, 1]");
  if (s.her_ratio < 0.0 || s.her_ratio > 1.0)
    throw ConfigError(prefix + ".her_ratio: must be within [0, 1]");
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  KeyReader r(j);
  ExperimentConfig c;
  c.seed = r.get<std::uint64_t>("seed", 0);
  c.output_dir = r.require<std::string>("output_dir");
  c.variant = parse_train_variant(r.get<std::string>("variant", "mem"));

  c.env_spec.width = r.require<int>("env.width");
  c.env_spec.height = r.require<int>("env.height");
  c.env_spec.variant = parse_grid_variant(r.require<std::string>("env.variant"));
  for (const auto& w :
       r.get<std::vector<std::vector<int>>>("env.walls", {})) {
    if (w.size() != 2)
      throw ConfigError("config key \"env.walls\": entries must be [x, y]");
    c.env_spec.walls.push_back({w[0], w[1]});
  }
  c.h_max = r.require<int>("env.h_max");

  c.n_expert = r.get<int>("dataset.n_expert", 100);
  c.n_random = r.get<int>("dataset.n_random", 400);
  c.noise = r.get<double>("dataset.noise", 0.1);

  const ScheduleConfig defaults;
  c.pretrain = read_schedule(r, "pretrain", defaults);
  c.train = read_schedule(r, "train", defaults);
  c.train_kind = parse_learner_kind(
      r.get<std::string>("train.kind", "dataset_constrained"));
  c.warm_start = r.get<bool>("train.warm_start", false);

  c.buffer_capacity = r.get<std::size_t>("buffer.capacity", 0);
  c.buffer_alpha = r.get<double>("buffer.alpha", 1.0);
  c.buffer_eps = r.get<double>("buffer.eps", 1e-3);

  c.eval_episodes = r.get<int>("eval.episodes", 50);
  c.eval_seeds = r.get<std::vector<std::uint64_t>>("eval.seeds", {1, 2, 3});

  c.analysis_samples_per_class =
      r.get<std::size_t>("analysis.samples_per_class", 2000);
  c.analysis_bins = r.get<int>("analysis.bins", 40);
  c.analysis_unreachable_only =
      r.get<bool>("analysis.unreachable_only", false);

  r.finish();
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const MissingArtifactError&) {
    throw ConfigError("config " + path.string() + ": file not found");
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": invalid JSON (" +
                      e.what() + ")");
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  j["variant"] = to_string(c.variant);
  j["env.width"] = c.env_spec.width;
  j["env.height"] = c.env_spec.height;
  j["env.variant"] = to_string(c.env_spec.variant);
  json walls = json::array();
  for (const Cell& w : c.env_spec.walls) walls.push_back({w.x, w.y});
  j["env.walls"] = std::move(walls);
  j["env.h_max"] = c.h_max;
  j["dataset.n_expert"] = c.n_expert;
  j["dataset.n_random"] = c.n_random;
  j["dataset.noise"] = c.noise;
  const auto put_schedule = [&j](const std::string& prefix,
                                 const ScheduleConfig& s) {
    j[prefix + ".updates"] = s.updates;
    j[prefix + ".batch_size"] = s.batch_size;
    j[prefix + ".learning_rate"] = s.learning_rate;
    j[prefix + ".rho"] = s.rho;
    j[prefix + ".her_ratio"] = s.her_ratio;
  };
  put_schedule("pretrain", c.pretrain);
  put_schedule("train", c.train);
  j["train.kind"] = to_string(c.train_kind);
  j["train.warm_start"] = c.warm_start;
  j["buffer.capacity"] = c.buffer_capacity;
  j["buffer.alpha"] = c.buffer_alpha;
  j["buffer.eps"] = c.buffer_eps;
  j["eval.episodes"] = c.eval_episodes;
  j["eval.seeds"] = c.eval_seeds;
  j["analysis.samples_per_class"] = c.analysis_samples_per_class;
  j["analysis.bins"] = c.analysis_bins;
  j["analysis.unreachable_only"] = c.analysis_unreachable_only;
  return j;
}

void validate_config(const ExperimentConfig& c) {
  if (c.output_dir.empty()) throw ConfigError("output_dir: must not be empty");
  // Full geometry checks live in build_env; run them now so bad configs fail
  // before any stage starts.
  build_env(c.env_spec, c.h_max);
  if (c.n_expert < 0) throw ConfigError("dataset.n_expert: must be >= 0");
  if (c.n_random < 0) throw ConfigError("dataset.n_random: must be >= 0");
  if (c.n_expert + c.n_random < 1)
    throw ConfigError("dataset: n_expert + n_random must be >= 1");
  if (c.noise < 0.0 || c.noise > 1.0)
    throw ConfigError("dataset.noise: must be within [0, 1]");
  check_schedule(c.pretrain, "pretrain");
  check_schedule(c.train, "train");
  if (c.buffer_alpha <= 0.0)
    throw ConfigError("buffer.alpha: must be positive");
  if (c.buffer_eps <= 0.0) throw ConfigError("buffer.eps: must be positive");
  if (c.eval_episodes < 1) throw ConfigError("eval.episodes: must be >= 1");
  if (c.eval_seeds.empty())
    throw ConfigError("eval.seeds: must list at least one seed");
  {
    std::set<std::uint64_t> unique(c.eval_seeds.begin(), c.eval_seeds.end());
    if (unique.size() != c.eval_seeds.size())
      throw ConfigError("eval.seeds: seeds must be distinct");
  }
  if (c.analysis_samples_per_class < 1)
    throw ConfigError("analysis.samples_per_class: must be >= 1");
  if (c.analysis_bins < 2) throw ConfigError("analysis.bins: must be >= 2");
}

std::string config_hash(const ExperimentConfig& c) {
  const std::string dump = config_to_json(c).dump();
  return hash_hex(hash_bytes(dump.data(), dump.size(), detail::kFnvOffset));
}

std::size_t resolve_buffer_capacity(const ExperimentConfig& c,
                                    std::size_t dataset_transitions) {
  if (c.buffer_capacity > 0) return c.buffer_capacity;
  return 10 * dataset_transitions;
}

}  // namespace pgser
