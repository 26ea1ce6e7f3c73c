#include "mace/ppo.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mace/errors.h"
#include "mace/grid_env.h"

namespace mace {

GaeResult Gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const std::uint8_t> dones, double last_value,
              double gamma, double gae_lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw UsageError("gae: mismatched sequence lengths");
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = dones[t] ? 0.0 : (t + 1 < n ? values[t + 1] : last_value);
    const double carry = dones[t] ? 0.0 : running;
    const double delta = rewards[t] + gamma * next_value - values[t];
    running = delta + gamma * gae_lambda * carry;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

Eigen::VectorXd LogProbabilities(const Eigen::MatrixXd& logits,
                                 std::span<const int> actions) {
  Eigen::VectorXd out(logits.cols());
  for (Eigen::Index n = 0; n < logits.cols(); ++n) {
    const double m = logits.col(n).maxCoeff();
    const double lse = m + std::log((logits.col(n).array() - m).exp().sum());
    out(n) = logits(actions[n], n) - lse;
  }
  return out;
}

SurrogateResult ClippedSurrogate(const Eigen::MatrixXd& logits,
                                 std::span<const int> actions,
                                 const Eigen::VectorXd& old_log_probs,
                                 const Eigen::VectorXd& advantages, double clip,
                                 double entropy_coef) {
  const Eigen::Index n = logits.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  SurrogateResult out;
  out.logit_grad.resize(logits.rows(), n);
  double surrogate = 0.0;
  double entropy = 0.0;
  int clipped = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double m = logits.col(k).maxCoeff();
    const Eigen::VectorXd shifted = logits.col(k).array() - m;
    const double lse = std::log(shifted.array().exp().sum());
    const Eigen::VectorXd logp = shifted.array() - lse;
    const Eigen::VectorXd p = logp.array().exp();
    const int a = actions[k];
    const double ratio = std::exp(logp(a) - old_log_probs(k));
    const double adv = advantages(k);
    const double unclipped = ratio * adv;
    const double clipped_term = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
    surrogate += std::min(unclipped, clipped_term);
    if (std::abs(ratio - 1.0) > clip) ++clipped;
    out.approx_kl += old_log_probs(k) - logp(a);

    const double h = -(p.array() * logp.array()).sum();
    entropy += h;

    // -min(...) contributes -A r (onehot - p) while the unclipped branch is
    // active, nothing once the clipped branch binds.
    const double g_logp = unclipped <= clipped_term ? -adv * ratio * inv_n : 0.0;
    Eigen::VectorXd g = -g_logp * p;
    g(a) += g_logp;
    // -c H: dH/dlogit_j = -p_j (logp_j + H)
    g.array() += entropy_coef * inv_n * p.array() * (logp.array() + h);
    out.logit_grad.col(k) = g;
  }
  out.entropy = entropy * inv_n;
  out.loss = -surrogate * inv_n - entropy_coef * out.entropy;
  out.clip_fraction = clipped * inv_n;
  out.approx_kl *= inv_n;
  return out;
}

ValueLossResult HuberValueLoss(const Eigen::RowVectorXd& values,
                               const Eigen::VectorXd& returns, double delta) {
  const Eigen::Index n = values.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  ValueLossResult out;
  out.grad.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double e = returns(k) - values(k);
    if (std::abs(e) <= delta) {
      out.loss += 0.5 * e * e;
      out.grad(k) = -e * inv_n;
    } else {
      out.loss += delta * (std::abs(e) - 0.5 * delta);
      out.grad(k) = -delta * (e > 0 ? 1.0 : -1.0) * inv_n;
    }
  }
  out.loss *= inv_n;
  return out;
}

void ValueNormalizer::Update(const Eigen::VectorXd& values) {
  if (values.size() == 0) return;
  running_mean_ = beta_ * running_mean_ + (1.0 - beta_) * values.mean();
  running_mean_sq_ =
      beta_ * running_mean_sq_ + (1.0 - beta_) * values.squaredNorm() / values.size();
  debias_ = beta_ * debias_ + (1.0 - beta_);
}

double ValueNormalizer::mean() const {
  return running_mean_ / std::max(debias_, epsilon_);
}

double ValueNormalizer::variance() const {
  const double m = mean();
  return std::max(running_mean_sq_ / std::max(debias_, epsilon_) - m * m, 1e-2);
}

AgentLearner::AgentLearner(int obs_dim, const PpoOptions& options,
                           std::uint64_t seed)
    : options_(options), shuffle_rng_(DeriveSeed(seed, {2})) {
  NetworkSpec pi{obs_dim, options.hidden, kNumActions, Head::kSoftmax};
  pi.output_gain = options.policy_head_gain;
  NetworkSpec v{obs_dim, options.hidden, 1, Head::kLinear};
  v.output_gain = 1.0;
  policy_ = Network(pi, DeriveSeed(seed, {kPolicyInitStream}));
  value_ = Network(v, DeriveSeed(seed, {kValueInitStream}));
  AdamOptions a;
  a.epsilon = options.adam_epsilon;
  a.max_grad_norm = options.max_grad_norm;
  a.learning_rate = options.actor_lr;
  policy_opt_ = Adam(policy_.num_parameters(), a);
  a.learning_rate = options.critic_lr;
  value_opt_ = Adam(value_.num_parameters(), a);
}

Eigen::MatrixXd AgentLearner::Probabilities(const Eigen::MatrixXd& obs) const {
  return policy_.Evaluate(obs);
}

Eigen::RowVectorXd AgentLearner::Values(const Eigen::MatrixXd& obs) const {
  Eigen::RowVectorXd v = value_.Evaluate(obs).row(0);
  if (options_.value_normalization) {
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = value_norm_.Denormalize(v(k));
  }
  return v;
}

PpoStats AgentLearner::Update(const PpoBatch& batch) {
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  if (n == 0) return {};
  Eigen::VectorXd advantages = batch.advantages;
  if (options_.normalize_advantages && n > 1) {
    const double mean = advantages.mean();
    const double var = (advantages.array() - mean).square().sum() / (n - 1);
    advantages = (advantages.array() - mean) / (std::sqrt(var) + 1e-5);
  }

  Eigen::VectorXd targets = batch.returns;
  if (options_.value_normalization) {
    value_norm_.Update(batch.returns);
    for (Eigen::Index k = 0; k < n; ++k) targets(k) = value_norm_.Normalize(targets(k));
  }

  const int num_mb = std::max(1, options_.num_minibatch);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);

  PpoStats stats;
  int updates = 0;
  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    if (num_mb > 1) std::shuffle(order.begin(), order.end(), shuffle_rng_);
    for (int mb = 0; mb < num_mb; ++mb) {
      const Eigen::Index begin = n * mb / num_mb;
      const Eigen::Index end = n * (mb + 1) / num_mb;
      if (end == begin) continue;
      const bool whole = num_mb == 1;
      std::vector<Eigen::Index> idx(order.begin() + begin, order.begin() + end);
      const Eigen::MatrixXd obs = whole ? batch.obs : Eigen::MatrixXd(batch.obs(Eigen::all, idx));
      std::vector<int> actions;
      Eigen::VectorXd old_logp(idx.size()), adv(idx.size()), ret(idx.size());
      actions.reserve(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        actions.push_back(batch.actions[idx[k]]);
        old_logp(k) = batch.old_log_probs(idx[k]);
        adv(k) = advantages(idx[k]);
        ret(k) = targets(idx[k]);
      }

      policy_.Forward(obs);
      const SurrogateResult surr =
          ClippedSurrogate(policy_.logits(), actions, old_logp, adv,
                           options_.clip, options_.entropy_coef);
      const Eigen::RowVectorXd values = value_.Forward(obs).row(0);
      const ValueLossResult vloss =
          HuberValueLoss(values, ret, options_.huber_delta);
      if (!std::isfinite(surr.loss) || !std::isfinite(vloss.loss)) {
        std::ostringstream msg;
        msg << "non-finite PPO loss at epoch " << epoch << ": policy="
            << surr.loss << " value=" << vloss.loss
            << " max|adv|=" << adv.cwiseAbs().maxCoeff()
            << " max|ret|=" << ret.cwiseAbs().maxCoeff();
        throw TrainingError(msg.str());
      }
      policy_opt_.Step(policy_.parameters(), policy_.BackwardFromLogits(surr.logit_grad));
      value_opt_.Step(value_.parameters(), value_.BackwardFromLogits(vloss.grad));

      stats.policy_loss += surr.loss;
      stats.value_loss += vloss.loss;
      stats.entropy += surr.entropy;
      stats.clip_fraction += surr.clip_fraction;
      stats.approx_kl += surr.approx_kl;
      ++updates;
    }
  }
  policy_.ClearCache();
  value_.ClearCache();
  if (updates > 0) {
    stats.policy_loss /= updates;
    stats.value_loss /= updates;
    stats.entropy /= updates;
    stats.clip_fraction /= updates;
    stats.approx_kl /= updates;
  }
  return stats;
}

}  // namespace mace
