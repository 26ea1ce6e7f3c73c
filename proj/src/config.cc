#include "mace/config.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mace/errors.h"

namespace mace {

using nlohmann::json;

std::string_view NoveltyBackendString(NoveltyBackend backend) {
  return backend == NoveltyBackend::kRnd ? "rnd" : "count";
}

std::string_view PosteriorBackendString(PosteriorBackend backend) {
  return backend == PosteriorBackend::kMlp ? "mlp" : "table";
}

namespace {

NoveltyBackend ParseNoveltyBackend(const std::string& s) {
  if (s == "count") return NoveltyBackend::kCount;
  if (s == "rnd") return NoveltyBackend::kRnd;
  throw ConfigError("novelty: expected 'count' or 'rnd', got '" + s + "'");
}

PosteriorBackend ParsePosteriorBackend(const std::string& s) {
  if (s == "table") return PosteriorBackend::kTable;
  if (s == "mlp") return PosteriorBackend::kMlp;
  throw ConfigError("posterior: expected 'table' or 'mlp', got '" + s + "'");
}

// Reads keys from one JSON object and rejects any it did not consume.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string prefix)
      : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) {
      throw ConfigError(Name("") + "expected a JSON object");
    }
  }

  template <typename T>
  void Read(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ConfigError("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_integer() && !it->is_number_unsigned() &&
              it->template get<std::int64_t>() < 0) {
            throw ConfigError("expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError("expected a string");
      }
      out = it->template get<T>();
    } catch (const ConfigError& e) {
      throw ConfigError(Name(key) + e.what());
    } catch (const json::exception& e) {
      throw ConfigError(Name(key) + e.what());
    }
  }

  const json* Sub(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void RejectUnknown() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError("unknown config key '" + prefix_ + it.key() + "'");
      }
    }
  }

  std::string Name(const std::string& key) const {
    return "config key '" + prefix_ + key + "': ";
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void Require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config key '" + key + "': " + what);
}

}  // namespace

void ValidateConfig(const RunConfig& c) {
  Require(c.grid_size >= 3, "grid_size", "must be at least 3");
  Require(c.max_steps >= 1, "max_steps", "must be positive");
  Require(std::isfinite(c.lambda) && c.lambda >= 0, "lambda", "must be >= 0");
  Require(std::isfinite(c.beta) && c.beta >= 0, "beta", "must be >= 0");
  Require(c.gamma >= 0 && c.gamma < 1, "gamma", "must lie in [0, 1)");
  Require(c.gae_lambda >= 0 && c.gae_lambda <= 1, "gae_lambda",
          "must lie in [0, 1]");
  Require(c.window >= 1, "window", "must be positive");
  Require(c.num_bins >= 1, "num_bins", "must be positive");
  Require(c.num_envs >= 1, "num_envs", "must be positive");
  Require(c.buffer_length >= 1, "buffer_length", "must be positive");
  Require(c.iterations >= 0, "iterations", "must be >= 0");
  Require(!c.seeds.empty(), "seeds", "must list at least one seed");
  Require(std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() ==
              c.seeds.size(),
          "seeds", "must be distinct");
  Require(!c.output_dir.empty(), "output_dir", "must not be empty");
  Require(c.checkpoint_every >= 0, "checkpoint_every", "must be >= 0");
  Require(c.eval_episodes >= 0, "eval_episodes", "must be >= 0");

  const PpoOptions& p = c.ppo;
  Require(!p.hidden.empty(), "ppo.hidden", "needs at least one layer");
  for (int h : p.hidden) Require(h >= 1, "ppo.hidden", "sizes must be positive");
  Require(p.clip > 0, "ppo.clip", "must be positive");
  Require(p.entropy_coef >= 0, "ppo.entropy_coef", "must be >= 0");
  Require(p.huber_delta > 0, "ppo.huber_delta", "must be positive");
  Require(p.epochs >= 1, "ppo.epochs", "must be positive");
  Require(p.num_minibatch >= 1, "ppo.num_minibatch", "must be positive");
  Require(p.actor_lr > 0, "ppo.actor_lr", "must be positive");
  Require(p.critic_lr > 0, "ppo.critic_lr", "must be positive");
  Require(p.adam_epsilon > 0, "ppo.adam_epsilon", "must be positive");
  Require(p.max_grad_norm >= 0, "ppo.max_grad_norm", "must be >= 0");
  Require(p.policy_head_gain > 0, "ppo.policy_head_gain", "must be positive");
}

RunConfig ConfigFromJson(const json& doc) {
  RunConfig c;
  ObjectReader r(doc, "");
  std::string task = std::string(TaskNameString(c.task));
  std::string mode = std::string(RewardModeString(c.mode));
  std::string novelty = std::string(NoveltyBackendString(c.novelty));
  std::string posterior = std::string(PosteriorBackendString(c.posterior));
  r.Read("task", task);
  r.Read("grid_size", c.grid_size);
  r.Read("layout_file", c.layout_file);
  r.Read("max_steps", c.max_steps);
  r.Read("mode", mode);
  r.Read("lambda", c.lambda);
  r.Read("beta", c.beta);
  r.Read("gamma", c.gamma);
  r.Read("gae_lambda", c.gae_lambda);
  r.Read("window", c.window);
  r.Read("num_bins", c.num_bins);
  r.Read("raw_z_weight", c.raw_z_weight);
  r.Read("novelty", novelty);
  r.Read("posterior", posterior);
  r.Read("num_envs", c.num_envs);
  r.Read("buffer_length", c.buffer_length);
  r.Read("iterations", c.iterations);
  r.Read("output_dir", c.output_dir);
  r.Read("decomposition_log", c.decomposition_log);
  r.Read("step_log", c.step_log);
  r.Read("bus_trace", c.bus_trace);
  r.Read("checkpoint_every", c.checkpoint_every);
  r.Read("eval_episodes", c.eval_episodes);

  if (const json* seeds = r.Sub("seeds")) {
    if (!seeds->is_array()) throw ConfigError(r.Name("seeds") + "expected an array");
    c.seeds.clear();
    for (const json& s : *seeds) {
      if (!s.is_number_unsigned()) {
        throw ConfigError(r.Name("seeds") + "expected non-negative integers");
      }
      c.seeds.push_back(s.get<std::uint64_t>());
    }
  }

  if (const json* ppo = r.Sub("ppo")) {
    ObjectReader p(*ppo, "ppo.");
    if (const json* hidden = p.Sub("hidden")) {
      if (!hidden->is_array()) {
        throw ConfigError(p.Name("hidden") + "expected an array");
      }
      c.ppo.hidden.clear();
      for (const json& h : *hidden) {
        if (!h.is_number_integer()) {
          throw ConfigError(p.Name("hidden") + "expected integers");
        }
        c.ppo.hidden.push_back(h.get<int>());
      }
    }
    p.Read("clip", c.ppo.clip);
    p.Read("entropy_coef", c.ppo.entropy_coef);
    p.Read("huber_delta", c.ppo.huber_delta);
    p.Read("epochs", c.ppo.epochs);
    p.Read("num_minibatch", c.ppo.num_minibatch);
    p.Read("actor_lr", c.ppo.actor_lr);
    p.Read("critic_lr", c.ppo.critic_lr);
    p.Read("adam_epsilon", c.ppo.adam_epsilon);
    p.Read("max_grad_norm", c.ppo.max_grad_norm);
    p.Read("policy_head_gain", c.ppo.policy_head_gain);
    p.Read("normalize_advantages", c.ppo.normalize_advantages);
    p.Read("value_normalization", c.ppo.value_normalization);
    p.RejectUnknown();
  }
  r.RejectUnknown();

  c.task = ParseTaskName(task);
  c.mode = ParseRewardMode(mode);
  c.novelty = ParseNoveltyBackend(novelty);
  c.posterior = ParsePosteriorBackend(posterior);
  ValidateConfig(c);
  return c;
}

json ConfigToJson(const RunConfig& c) {
  json ppo = {
      {"hidden", c.ppo.hidden},
      {"clip", c.ppo.clip},
      {"entropy_coef", c.ppo.entropy_coef},
      {"huber_delta", c.ppo.huber_delta},
      {"epochs", c.ppo.epochs},
      {"num_minibatch", c.ppo.num_minibatch},
      {"actor_lr", c.ppo.actor_lr},
      {"critic_lr", c.ppo.critic_lr},
      {"adam_epsilon", c.ppo.adam_epsilon},
      {"max_grad_norm", c.ppo.max_grad_norm},
      {"policy_head_gain", c.ppo.policy_head_gain},
      {"normalize_advantages", c.ppo.normalize_advantages},
      {"value_normalization", c.ppo.value_normalization},
  };
  return {
      {"task", TaskNameString(c.task)},
      {"grid_size", c.grid_size},
      {"layout_file", c.layout_file},
      {"max_steps", c.max_steps},
      {"mode", RewardModeString(c.mode)},
      {"lambda", c.lambda},
      {"beta", c.beta},
      {"gamma", c.gamma},
      {"gae_lambda", c.gae_lambda},
      {"window", c.window},
      {"num_bins", c.num_bins},
      {"raw_z_weight", c.raw_z_weight},
      {"novelty", NoveltyBackendString(c.novelty)},
      {"posterior", PosteriorBackendString(c.posterior)},
      {"num_envs", c.num_envs},
      {"buffer_length", c.buffer_length},
      {"iterations", c.iterations},
      {"seeds", c.seeds},
      {"output_dir", c.output_dir},
      {"ppo", ppo},
      {"decomposition_log", c.decomposition_log},
      {"step_log", c.step_log},
      {"bus_trace", c.bus_trace},
      {"checkpoint_every", c.checkpoint_every},
      {"eval_episodes", c.eval_episodes},
  };
}

RunConfig ParseConfig(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ConfigFromJson(doc);
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return ParseConfig(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string SerializeConfig(const RunConfig& config) {
  return ConfigToJson(config).dump(2) + "\n";
}

}  // namespace mace
