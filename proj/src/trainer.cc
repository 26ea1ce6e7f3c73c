#include "mace/trainer.h"

#include <algorithm>
#include <cmath>

#include "mace/errors.h"
#include "mace/relabel.h"
#include "mace/rewards.h"

namespace mace {

namespace {

double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int SampleAction(const Eigen::MatrixXd& probs, Eigen::Index col, Rng& rng) {
  const double r = Uniform01(rng);
  double cum = 0.0;
  for (int a = 0; a < kNumActions - 1; ++a) {
    cum += probs(a, col);
    if (r < cum) return a;
  }
  return kNumActions - 1;
}

int GreedyAction(const Eigen::VectorXd& probs) {
  Eigen::Index best;
  probs.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

TaskSpec BuildTaskSpec(const RunConfig& config) {
  if (config.layout_file.empty()) {
    return MakeTaskSpec(config.task, config.grid_size, config.max_steps);
  }
  return MakeTaskSpec(config.task, LoadLayoutFile(config.layout_file),
                      config.max_steps);
}

struct Trainer::Rollout {
  int num_envs = 0;
  int length = 0;
  // Per agent, indexed [env * length + t].
  std::vector<Eigen::MatrixXd> features;
  std::vector<std::vector<std::int64_t>> keys;
  std::vector<std::vector<int>> actions;
  std::vector<Eigen::VectorXd> log_probs;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<Cell>> cells;
  std::vector<std::vector<double>> novelty;  // as received over the bus
  std::vector<Eigen::MatrixXd> next_features;  // RND backend only
  std::vector<std::vector<double>> last_value;  // [agent][env]
  std::vector<std::vector<RewardBreakdown>> shaped;
  // Shared across agents.
  std::vector<double> r_ext;
  std::vector<std::uint8_t> done;

  int episodes = 0;
  int successes = 0;
  double return_sum = 0.0;

  std::size_t size() const {
    return static_cast<std::size_t>(num_envs) * length;
  }
};

Trainer::Trainer(const RunConfig& config, std::uint64_t seed)
    : config_(config),
      spec_(BuildTaskSpec(config)),
      seed_(seed),
      bus_(spec_.num_agents),
      action_rng_(DeriveSeed(seed, {kActionStream})),
      eval_rng_(DeriveSeed(seed, {kActionStream, 1})) {
  ValidateConfig(config_);
  const int n = spec_.num_agents;
  const int obs_dim = spec_.observation_dim();
  for (int i = 0; i < n; ++i) {
    learners_.emplace_back(obs_dim, config_.ppo, DeriveSeed(seed, {0, static_cast<std::uint64_t>(i)}));
    tables_.emplace_back(spec_.grid_size);
    if (config_.novelty == NoveltyBackend::kRnd) {
      rnd_.emplace_back(obs_dim, DeriveSeed(seed, {kRndStream, static_cast<std::uint64_t>(i)}));
    }
  }
  ppo_stats_.resize(n);
  for (int e = 0; e < config_.num_envs; ++e) envs_.emplace_back(spec_);

  const bool pairwise = UsesPairwisePosterior(config_.mode);
  const bool summed = UsesSummedPosterior(config_.mode);
  if (pairwise || summed) {
    PosteriorStore::Options opts;
    opts.backend = config_.posterior;
    opts.num_agents = n;
    opts.num_obs_keys = NumObservationKeys(spec_);
    opts.obs_dim = obs_dim;
    opts.num_bins = config_.num_bins;
    opts.window = config_.window;
    opts.gamma = config_.gamma;
    opts.pairwise = pairwise;
    opts.summed = summed;
    opts.seed = DeriveSeed(seed, {kPosteriorStream});
    posterior_ = std::make_unique<PosteriorStore>(opts);
  }
}

Trainer::~Trainer() = default;

void Trainer::SetStepLog(std::ostream* out) {
  step_log_ = out;
  if (step_log_) *step_log_ << "iteration,env,t,agent,x,y,r_ext,r_nov,r_hin\n";
}

void Trainer::Collect(Rollout& ro) {
  const int n_agents = spec_.num_agents;
  const int num_envs = config_.num_envs;
  const int length = config_.buffer_length;
  const int obs_dim = spec_.observation_dim();
  const int g = spec_.grid_size;
  const std::size_t total = static_cast<std::size_t>(num_envs) * length;
  const bool rnd = config_.novelty == NoveltyBackend::kRnd;

  ro.num_envs = num_envs;
  ro.length = length;
  ro.features.assign(n_agents, Eigen::MatrixXd(obs_dim, total));
  ro.keys.assign(n_agents, std::vector<std::int64_t>(total));
  ro.actions.assign(n_agents, std::vector<int>(total));
  ro.log_probs.assign(n_agents, Eigen::VectorXd(total));
  ro.values.assign(n_agents, std::vector<double>(total));
  ro.cells.assign(n_agents, std::vector<Cell>(total));
  ro.novelty.assign(n_agents, std::vector<double>(total));
  if (rnd) ro.next_features.assign(n_agents, Eigen::MatrixXd(obs_dim, total));
  ro.last_value.assign(n_agents, std::vector<double>(num_envs));
  ro.r_ext.assign(total, 0.0);
  ro.done.assign(total, 0);

  std::vector<std::vector<LocalObservation>> obs(num_envs);
  std::vector<double> episode_return(num_envs, 0.0);
  for (int e = 0; e < num_envs; ++e) {
    obs[e] = envs_[e].Reset(DeriveSeed(seed_, {kEnvStream, static_cast<std::uint64_t>(iteration_), static_cast<std::uint64_t>(e)}));
  }

  Eigen::MatrixXd batch_obs(obs_dim, num_envs);
  std::vector<std::vector<Action>> joint(num_envs, std::vector<Action>(n_agents));
  std::vector<std::vector<double>> u(n_agents, std::vector<double>(num_envs));
  std::vector<StepResult> results(num_envs);

  for (int t = 0; t < length; ++t) {
    for (int i = 0; i < n_agents; ++i) {
      for (int e = 0; e < num_envs; ++e) {
        obs[e][i].Features(g, {batch_obs.col(e).data(), static_cast<std::size_t>(obs_dim)});
      }
      const Eigen::MatrixXd probs = learners_[i].Probabilities(batch_obs);
      const Eigen::RowVectorXd values = learners_[i].Values(batch_obs);
      for (int e = 0; e < num_envs; ++e) {
        const std::size_t idx = static_cast<std::size_t>(e) * length + t;
        const int a = SampleAction(probs, e, action_rng_);
        joint[e][i] = static_cast<Action>(a);
        ro.features[i].col(idx) = batch_obs.col(e);
        ro.keys[i][idx] = obs[e][i].Key(g);
        ro.actions[i][idx] = a;
        ro.log_probs[i](idx) = std::log(std::max(probs(a, e), 1e-300));
        ro.values[i][idx] = values(e);
        ro.cells[i][idx] = {obs[e][i].x, obs[e][i].y};
      }
    }

    for (int e = 0; e < num_envs; ++e) {
      results[e] = envs_[e].Step(joint[e]);
    }
    env_steps_ += num_envs;

    // u_t^i = novelty(o_{t+1}^i), recorded before it is queried.
    for (int i = 0; i < n_agents; ++i) {
      if (rnd) {
        Eigen::MatrixXd next(obs_dim, num_envs);
        for (int e = 0; e < num_envs; ++e) {
          results[e].observations[i].Features(g, {next.col(e).data(), static_cast<std::size_t>(obs_dim)});
          ro.next_features[i].col(static_cast<Eigen::Index>(e) * length + t) = next.col(e);
        }
        const Eigen::VectorXd nov = rnd_[i].Novelty(next);
        for (int e = 0; e < num_envs; ++e) u[i][e] = nov(e);
      } else {
        for (int e = 0; e < num_envs; ++e) {
          const LocalObservation& o = results[e].observations[i];
          u[i][e] = tables_[i].RecordAndQuery(o.x, o.y);
        }
      }
    }

    for (int e = 0; e < num_envs; ++e) {
      const std::size_t idx = static_cast<std::size_t>(e) * length + t;
      BusFrame frame = bus_.OpenFrame();
      for (int i = 0; i < n_agents; ++i) frame.Broadcast(i, u[i][e]);
      const std::vector<double>& received = frame.Collect(0);
      for (int j = 0; j < n_agents; ++j) ro.novelty[j][idx] = received[j];

      const StepResult& r = results[e];
      ro.r_ext[idx] = r.reward;
      episode_return[e] += r.reward;
      if (r.done) {
        ro.done[idx] = 1;
        ++ro.episodes;
        ro.successes += r.success ? 1 : 0;
        ro.return_sum += episode_return[e];
        episode_return[e] = 0.0;
        obs[e] = envs_[e].Reset(DeriveSeed(seed_, {kEnvStream, static_cast<std::uint64_t>(iteration_), static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(t)}));
      } else {
        obs[e] = r.observations;
      }
    }
  }

  for (int i = 0; i < n_agents; ++i) {
    for (int e = 0; e < num_envs; ++e) {
      obs[e][i].Features(g, {batch_obs.col(e).data(), static_cast<std::size_t>(obs_dim)});
    }
    const Eigen::RowVectorXd values = learners_[i].Values(batch_obs);
    for (int e = 0; e < num_envs; ++e) ro.last_value[i][e] = values(e);
  }
}

void Trainer::ShapeRewards(Rollout& ro) {
  const int n_agents = spec_.num_agents;
  const std::size_t total = ro.size();
  const int length = ro.length;
  const double gamma = config_.gamma;
  const int bins = config_.num_bins;

  auto accumulate = [&](const std::vector<double>& values) {
    std::vector<double> z(total);
    for (int e = 0; e < ro.num_envs; ++e) {
      const std::size_t off = static_cast<std::size_t>(e) * length;
      AccumulateSegments(std::span(values).subspan(off, length),
                         std::span<const std::uint8_t>(ro.done).subspan(off, length),
                         gamma, std::span(z).subspan(off, length));
    }
    return z;
  };

  const bool hindsight = UsesHindsight(config_.mode);
  std::vector<std::vector<double>> z_tilde(n_agents);
  std::vector<std::vector<double>> weight(n_agents);
  if (hindsight) {
    for (int j = 0; j < n_agents; ++j) {
      z_tilde[j] = accumulate(Relabel(ro.novelty[j]).labels);
      weight[j] = config_.raw_z_weight ? accumulate(ro.novelty[j]) : z_tilde[j];
    }
  }

  // log(p_hat / pi_old) per ordered pair [i * N + j] and per summed agent.
  std::vector<std::vector<double>> pair_ratio(n_agents * n_agents);
  std::vector<std::vector<double>> summed_ratio(n_agents);
  if (posterior_) {
    const bool features = config_.posterior == PosteriorBackend::kMlp;
    auto score = [&](ActionPosterior& post, int i, const std::vector<double>& z,
                     double scale) {
      PosteriorBatch batch;
      batch.actions = ro.actions[i];
      batch.obs_keys = ro.keys[i];
      batch.bins.resize(total);
      for (std::size_t k = 0; k < total; ++k) {
        batch.bins[k] = DiscretizeZ(z[k], bins, gamma, scale);
      }
      if (features) {
        batch.features = ro.features[i];
        batch.z = z;
      }
      post.Update(batch);
      const Eigen::VectorXd p = post.Probabilities(batch);
      std::vector<double> ratio(total);
      for (std::size_t k = 0; k < total; ++k) {
        ratio[k] = LogPosteriorRatio(p(k), std::exp(ro.log_probs[i](k)));
      }
      return ratio;
    };
    for (int i = 0; i < n_agents; ++i) {
      if (posterior_->has_pairwise()) {
        for (int j = 0; j < n_agents; ++j) {
          if (j == i) continue;
          pair_ratio[i * n_agents + j] = score(posterior_->Pair(i, j), i, z_tilde[j], 1.0);
        }
      }
      if (posterior_->has_summed()) {
        std::vector<double> z_sum(total, 0.0);
        for (int j = 0; j < n_agents; ++j) {
          if (j == i) continue;
          for (std::size_t k = 0; k < total; ++k) z_sum[k] += z_tilde[j][k];
        }
        summed_ratio[i] = score(posterior_->Summed(i), i, z_sum, std::max(1, n_agents - 1));
      }
    }
  }

  const RewardWeights weights{config_.lambda, config_.beta};
  std::vector<double> novelties(n_agents);
  std::vector<double> z_others;
  std::vector<double> ratio_others;
  ro.shaped.assign(n_agents, std::vector<RewardBreakdown>(total));
  for (std::size_t k = 0; k < total; ++k) {
    for (int j = 0; j < n_agents; ++j) novelties[j] = ro.novelty[j][k];
    for (int i = 0; i < n_agents; ++i) {
      HindsightTerms terms;
      z_others.clear();
      ratio_others.clear();
      if (hindsight) {
        for (int j = 0; j < n_agents; ++j) {
          if (j == i) continue;
          z_others.push_back(weight[j][k]);
          terms.z_summed += weight[j][k];
          const auto& pr = pair_ratio[i * n_agents + j];
          if (!pr.empty()) ratio_others.push_back(pr[k]);
        }
        if (!summed_ratio[i].empty()) terms.log_ratio_summed = summed_ratio[i][k];
      }
      terms.z_others = z_others;
      terms.log_ratio_others = ratio_others;
      ro.shaped[i][k] = ShapedReward(config_.mode, weights, ro.r_ext[k], novelties, i, terms);
    }
  }
}

IterationRecord Trainer::RunIteration() {
  Rollout ro;
  Collect(ro);
  ShapeRewards(ro);

  const int n_agents = spec_.num_agents;
  const std::size_t total = ro.size();
  const int length = ro.length;

  if (config_.novelty == NoveltyBackend::kRnd) {
    for (int i = 0; i < n_agents; ++i) {
      for (int s = 0; s < config_.ppo.epochs; ++s) rnd_[i].Update(ro.next_features[i]);
    }
  }

  IterationRecord rec;
  rec.iteration = iteration_;
  rec.episodes = ro.episodes;
  if (ro.episodes > 0) {
    rec.mean_episode_reward = ro.return_sum / ro.episodes;
    rec.success_rate = static_cast<double>(ro.successes) / ro.episodes;
  }

  double sum_nov = 0.0;
  double sum_hin = 0.0;
  const int g = spec_.grid_size;
  decomposition_.clear();
  for (int i = 0; i < n_agents; ++i) {
    std::vector<double> rewards(total);
    std::vector<std::int64_t> visits;
    std::vector<double> cell_nov, cell_hin, cell_ext;
    if (config_.decomposition_log) {
      visits.assign(g * g, 0);
      cell_nov.assign(g * g, 0.0);
      cell_hin.assign(g * g, 0.0);
      cell_ext.assign(g * g, 0.0);
    }
    for (std::size_t k = 0; k < total; ++k) {
      const RewardBreakdown& rb = ro.shaped[i][k];
      rewards[k] = rb.total;
      sum_nov += rb.r_nov;
      sum_hin += rb.r_hin;
      const Cell c = ro.cells[i][k];
      if (config_.decomposition_log) {
        const int idx = c.y * g + c.x;
        ++visits[idx];
        cell_nov[idx] += rb.r_nov;
        cell_hin[idx] += rb.r_hin;
        cell_ext[idx] += rb.r_ext;
      }
      if (step_log_) {
        *step_log_ << iteration_ << ',' << k / length << ',' << k % length << ','
                   << i << ',' << c.x << ',' << c.y << ',' << rb.r_ext << ','
                   << rb.r_nov << ',' << rb.r_hin << '\n';
      }
    }
    if (config_.decomposition_log) {
      for (int idx = 0; idx < g * g; ++idx) {
        if (visits[idx] == 0) continue;
        decomposition_.push_back({iteration_, i, idx % g, idx / g, visits[idx],
                                  cell_nov[idx], cell_hin[idx], cell_ext[idx]});
      }
    }

    PpoBatch batch;
    batch.obs = std::move(ro.features[i]);
    batch.actions = std::move(ro.actions[i]);
    batch.old_log_probs = std::move(ro.log_probs[i]);
    batch.advantages.resize(total);
    batch.returns.resize(total);
    for (int e = 0; e < ro.num_envs; ++e) {
      const std::size_t off = static_cast<std::size_t>(e) * length;
      const GaeResult gae =
          Gae(std::span<const double>(rewards).subspan(off, length),
              std::span<const double>(ro.values[i]).subspan(off, length),
              std::span<const std::uint8_t>(ro.done).subspan(off, length),
              ro.last_value[i][e], config_.gamma, config_.gae_lambda);
      for (int t = 0; t < length; ++t) {
        batch.advantages(off + t) = gae.advantages[t];
        batch.returns(off + t) = gae.returns[t];
      }
    }
    ppo_stats_[i] = learners_[i].Update(batch);
  }
  rec.mean_r_nov = sum_nov / (static_cast<double>(total) * n_agents);
  rec.mean_r_hin = sum_hin / (static_cast<double>(total) * n_agents);

  ++iteration_;
  rec.env_steps = env_steps_;
  return rec;
}

std::vector<IterationRecord> Trainer::Train() {
  std::vector<IterationRecord> curve;
  curve.reserve(config_.iterations);
  for (int it = 0; it < config_.iterations; ++it) curve.push_back(RunIteration());
  return curve;
}

EvalResult Trainer::Evaluate(int episodes, bool greedy) {
  EvalResult out;
  const int n_agents = spec_.num_agents;
  const int g = spec_.grid_size;
  std::vector<double> feat(spec_.observation_dim());
  std::vector<Action> joint(n_agents);
  GridEnv env(spec_);
  double length_sum = 0.0;
  double return_sum = 0.0;
  int successes = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<LocalObservation> obs = env.Reset();
    double ret = 0.0;
    int steps = 0;
    bool success = false;
    while (true) {
      for (int i = 0; i < n_agents; ++i) {
        obs[i].Features(g, feat);
        const Eigen::VectorXd p = learners_[i].policy().Evaluate(std::span<const double>(feat));
        int a;
        if (greedy) {
          a = GreedyAction(p);
        } else {
          Eigen::MatrixXd pm = p;
          a = SampleAction(pm, 0, eval_rng_);
        }
        joint[i] = static_cast<Action>(a);
      }
      const StepResult& r = env.Step(joint);
      ret += r.reward;
      ++steps;
      if (r.done) {
        success = r.success;
        break;
      }
      obs = r.observations;
    }
    length_sum += steps;
    return_sum += ret;
    successes += success ? 1 : 0;
  }
  out.episodes = episodes;
  if (episodes > 0) {
    out.success_rate = static_cast<double>(successes) / episodes;
    out.mean_episode_reward = return_sum / episodes;
    out.mean_length = length_sum / episodes;
  }
  return out;
}

}  // namespace mace
