#ifndef MACE_PPO_H_
#define MACE_PPO_H_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mace/mlp.h"
#include "mace/rng.h"

namespace mace {

struct PpoOptions {
  std::vector<int> hidden = {64, 64};
  double clip = 0.2;
  double entropy_coef = 0.05;
  double huber_delta = 10.0;
  int epochs = 10;
  int num_minibatch = 1;
  double actor_lr = 7e-4;
  double critic_lr = 7e-4;
  double adam_epsilon = 1e-5;
  double max_grad_norm = 10.0;
  double policy_head_gain = 0.01;
  bool normalize_advantages = true;
  // Critic regresses returns standardized by a running mean and variance.
  bool value_normalization = true;
};

// Debiased exponential running mean and variance of value targets.
class ValueNormalizer {
 public:
  explicit ValueNormalizer(double beta = 0.99999, double epsilon = 1e-5)
      : beta_(beta), epsilon_(epsilon) {}

  void Update(const Eigen::VectorXd& values);
  double mean() const;
  double variance() const;  // floored at 1e-2
  double Normalize(double v) const { return (v - mean()) / std::sqrt(variance()); }
  double Denormalize(double v) const { return v * std::sqrt(variance()) + mean(); }

 private:
  double beta_;
  double epsilon_;
  double running_mean_ = 0.0;
  double running_mean_sq_ = 0.0;
  double debias_ = 0.0;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one environment's time-ordered
// steps. dones[t] marks that step t ended its episode (next value 0);
// last_value bootstraps the step after the final one when it did not end.
GaeResult Gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double last_value,
              double gamma, double gae_lambda);

// Row vector of log-softmax entries picked by `actions` per column.
Eigen::VectorXd LogProbabilities(const Eigen::MatrixXd& logits,
                                 std::span<const int> actions);

struct SurrogateResult {
  double loss = 0.0;           // -mean(min(r A, clip(r) A)) - c * mean(H)
  double entropy = 0.0;        // mean policy entropy
  double clip_fraction = 0.0;  // share of samples with |r - 1| > clip
  double approx_kl = 0.0;      // mean(old_logp - logp)
  Eigen::MatrixXd logit_grad;  // dloss/dlogits
};

SurrogateResult ClippedSurrogate(const Eigen::MatrixXd& logits,
                                 std::span<const int> actions,
                                 const Eigen::VectorXd& old_log_probs,
                                 const Eigen::VectorXd& advantages, double clip,
                                 double entropy_coef);

struct ValueLossResult {
  double loss = 0.0;
  Eigen::RowVectorXd grad;  // dloss/dvalue
};

// mean Huber(returns - values; delta)
ValueLossResult HuberValueLoss(const Eigen::RowVectorXd& values,
                               const Eigen::VectorXd& returns, double delta);

struct PpoBatch {
  Eigen::MatrixXd obs;  // obs_dim x n
  std::vector<int> actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  std::size_t size() const { return actions.size(); }
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// One agent's independent actor and critic. Agents never share parameters.
class AgentLearner {
 public:
  AgentLearner(int obs_dim, const PpoOptions& options, std::uint64_t seed);

  Eigen::MatrixXd Probabilities(const Eigen::MatrixXd& obs) const;
  // Value estimates in return units (denormalized when value
  // normalization is on).
  Eigen::RowVectorXd Values(const Eigen::MatrixXd& obs) const;

  // `epochs` passes of `num_minibatch` shuffled mini-batches each. Throws
  // TrainingError when a loss turns non-finite.
  PpoStats Update(const PpoBatch& batch);

  Network& policy() { return policy_; }
  const Network& policy() const { return policy_; }
  Network& value() { return value_; }
  const Network& value() const { return value_; }
  const PpoOptions& options() const { return options_; }
  const ValueNormalizer& value_normalizer() const { return value_norm_; }

 private:
  PpoOptions options_;
  Network policy_;
  Network value_;
  Adam policy_opt_;
  Adam value_opt_;
  Rng shuffle_rng_;
  ValueNormalizer value_norm_;
};

}  // namespace mace

#endif  // MACE_PPO_H_
