#ifndef MACE_TRAINER_H_
#define MACE_TRAINER_H_

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "mace/config.h"
#include "mace/grid_env.h"
#include "mace/novelty.h"
#include "mace/novelty_bus.h"
#include "mace/posterior.h"
#include "mace/ppo.h"
#include "mace/rng.h"

namespace mace {

struct IterationRecord {
  int iteration = 0;
  std::int64_t env_steps = 0;  // cumulative joint env steps
  // Per-agent extrinsic return averaged over episodes that finished inside
  // this iteration's rollout.
  double mean_episode_reward = 0.0;
  double mean_r_nov = 0.0;  // per agent-step, before beta
  double mean_r_hin = 0.0;  // per agent-step, before lambda and beta
  double success_rate = 0.0;
  int episodes = 0;
};

// Per-(agent, cell) sums over one iteration, keyed by the cell the agent
// occupied when it acted.
struct CellStats {
  int iteration = 0;
  int agent = 0;
  int x = 0;
  int y = 0;
  std::int64_t visits = 0;
  double r_nov = 0.0;
  double r_hin = 0.0;
  double r_ext = 0.0;
};

struct EvalResult {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_episode_reward = 0.0;
  double mean_length = 0.0;
};

TaskSpec BuildTaskSpec(const RunConfig& config);

// One seed of independent PPO with shaped rewards. Every iteration starts
// all environments from a fresh reset, runs them in lockstep for
// buffer_length steps (auto-resetting finished episodes), then computes
// hindsight rewards and updates each agent.
class Trainer {
 public:
  Trainer(const RunConfig& config, std::uint64_t seed);
  ~Trainer();

  IterationRecord RunIteration();
  // Runs config.iterations iterations.
  std::vector<IterationRecord> Train();

  // Execution-mode rollout: no bus, no novelty, no learning. Greedy picks
  // the arg-max action; otherwise actions are sampled from a dedicated
  // stream that leaves training randomness untouched.
  EvalResult Evaluate(int episodes, bool greedy = true);

  // Optional per-agent-step CSV rows
  // (iteration,env,t,agent,x,y,r_ext,r_nov,r_hin). Header written here.
  void SetStepLog(std::ostream* out);
  void SetBusTrace(std::ostream* out) { bus_.SetTrace(out); }

  const RunConfig& config() const { return config_; }
  const TaskSpec& spec() const { return spec_; }
  int num_agents() const { return spec_.num_agents; }
  int iteration() const { return iteration_; }
  std::int64_t env_steps() const { return env_steps_; }
  const NoveltyBus& bus() const { return bus_; }
  AgentLearner& learner(int agent) { return learners_.at(agent); }
  const AgentLearner& learner(int agent) const { return learners_.at(agent); }
  const VisitCountTable& visits(int agent) const { return tables_.at(agent); }
  const RndEstimator& rnd(int agent) const { return rnd_.at(agent); }
  // Cells visited during the most recent iteration (empty unless
  // decomposition logging is on).
  const std::vector<CellStats>& decomposition() const { return decomposition_; }
  const PpoStats& last_ppo_stats(int agent) const { return ppo_stats_.at(agent); }

 private:
  struct Rollout;

  void Collect(Rollout& ro);
  void ShapeRewards(Rollout& ro);

  RunConfig config_;
  TaskSpec spec_;
  std::uint64_t seed_;
  std::vector<AgentLearner> learners_;
  std::vector<GridEnv> envs_;
  std::vector<VisitCountTable> tables_;
  std::vector<RndEstimator> rnd_;
  std::unique_ptr<PosteriorStore> posterior_;
  NoveltyBus bus_;
  Rng action_rng_;
  Rng eval_rng_;
  int iteration_ = 0;
  std::int64_t env_steps_ = 0;
  std::vector<CellStats> decomposition_;
  std::vector<PpoStats> ppo_stats_;
  std::ostream* step_log_ = nullptr;
};

}  // namespace mace

#endif  // MACE_TRAINER_H_
