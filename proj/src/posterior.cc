#include "mace/posterior.h"

#include <cmath>
#include <string>

#include "mace/errors.h"
#include "mace/rng.h"

namespace mace {

PosteriorTable::PosteriorTable(std::int64_t num_obs_keys, int num_bins,
                               int window)
    : num_obs_keys_(num_obs_keys), num_bins_(num_bins), window_(window) {
  if (num_obs_keys <= 0 || num_bins <= 0 || window <= 0) {
    throw ConfigError("posterior table needs positive keys, bins and window");
  }
  slot_counts_.assign(num_obs_keys * num_bins, 0);
  action_counts_.assign(num_obs_keys * num_bins * kNumActions, 0);
}

std::int64_t PosteriorTable::Slot(std::int64_t obs_key, int bin) const {
  if (obs_key < 0 || obs_key >= num_obs_keys_ || bin < 0 || bin >= num_bins_) {
    throw UsageError("posterior key out of range");
  }
  return obs_key * num_bins_ + bin;
}

void PosteriorTable::Update(const PosteriorBatch& batch) {
  if (batch.obs_keys.size() != batch.size() || batch.bins.size() != batch.size()) {
    throw UsageError("posterior batch fields have mismatched lengths");
  }
  std::vector<std::uint32_t> indices;
  indices.reserve(batch.size());
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const int a = batch.actions[n];
    if (a < 0 || a >= kNumActions) throw UsageError("posterior action out of range");
    const std::int64_t slot = Slot(batch.obs_keys[n], batch.bins[n]);
    const std::int64_t idx = slot * kNumActions + a;
    ++action_counts_[idx];
    ++slot_counts_[slot];
    indices.push_back(static_cast<std::uint32_t>(idx));
  }
  history_.push_back(std::move(indices));
  while (static_cast<int>(history_.size()) > window_) {
    for (std::uint32_t idx : history_.front()) {
      --action_counts_[idx];
      --slot_counts_[idx / kNumActions];
    }
    history_.pop_front();
  }
}

std::array<double, kNumActions> PosteriorTable::Query(std::int64_t obs_key,
                                                      int bin) const {
  const std::int64_t slot = Slot(obs_key, bin);
  std::array<double, kNumActions> p;
  const std::uint32_t total = slot_counts_[slot];
  for (int a = 0; a < kNumActions; ++a) {
    p[a] = total == 0 ? 1.0 / kNumActions
                      : static_cast<double>(action_counts_[slot * kNumActions + a]) /
                            total;
  }
  return p;
}

Eigen::VectorXd PosteriorTable::Probabilities(const PosteriorBatch& batch) const {
  Eigen::VectorXd p(batch.size());
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const std::int64_t slot = Slot(batch.obs_keys[n], batch.bins[n]);
    const std::uint32_t total = slot_counts_[slot];
    p(n) = total == 0
               ? 1.0 / kNumActions
               : static_cast<double>(
                     action_counts_[slot * kNumActions + batch.actions[n]]) /
                     total;
  }
  return p;
}

std::uint32_t PosteriorTable::Count(int action, std::int64_t obs_key,
                                    int bin) const {
  return action_counts_[Slot(obs_key, bin) * kNumActions + action];
}

std::uint32_t PosteriorTable::Count(std::int64_t obs_key, int bin) const {
  return slot_counts_[Slot(obs_key, bin)];
}

MlpPosterior::MlpPosterior(int obs_dim, std::uint64_t seed,
                           MlpPosteriorOptions options)
    : obs_dim_(obs_dim), options_(std::move(options)) {
  NetworkSpec spec{obs_dim + 1, options_.hidden, kNumActions, Head::kSoftmax};
  spec.output_gain = 0.01;
  net_ = Network(spec, seed);
  AdamOptions adam;
  adam.learning_rate = options_.learning_rate;
  adam.epsilon = options_.epsilon;
  adam.max_grad_norm = 10.0;
  optimizer_ = Adam(net_.num_parameters(), adam);
}

Eigen::MatrixXd MlpPosterior::Inputs(const Eigen::MatrixXd& features,
                                     std::span<const double> z) const {
  if (features.rows() != obs_dim_ ||
      features.cols() != static_cast<Eigen::Index>(z.size())) {
    throw UsageError("MLP posterior needs obs features and z for every sample");
  }
  Eigen::MatrixXd inputs(obs_dim_ + 1, features.cols());
  inputs.topRows(obs_dim_) = features;
  for (Eigen::Index n = 0; n < features.cols(); ++n) {
    inputs(obs_dim_, n) = z[n] * (1.0 - options_.gamma);
  }
  return inputs;
}

void MlpPosterior::Update(const PosteriorBatch& batch) {
  const Eigen::MatrixXd inputs = Inputs(batch.features, batch.z);
  for (std::size_t n = 0; n < batch.size(); ++n) {
    inputs_.push_back(inputs.col(n));
    actions_.push_back(batch.actions[n]);
  }
  while (static_cast<std::int64_t>(actions_.size()) > options_.buffer_size) {
    inputs_.pop_front();
    actions_.pop_front();
  }
  if (actions_.empty()) return;

  const Eigen::Index n = static_cast<Eigen::Index>(actions_.size());
  Eigen::MatrixXd x(obs_dim_ + 1, n);
  for (Eigen::Index k = 0; k < n; ++k) x.col(k) = inputs_[k];
  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    const Eigen::MatrixXd& probs = net_.Forward(x);
    // d(mean CE)/dlogits = (p - onehot) / n
    Eigen::MatrixXd grad = probs;
    for (Eigen::Index k = 0; k < n; ++k) grad(actions_[k], k) -= 1.0;
    grad /= static_cast<double>(n);
    optimizer_.Step(net_.parameters(), net_.BackwardFromLogits(grad));
  }
  net_.ClearCache();
}

Eigen::VectorXd MlpPosterior::Probabilities(const PosteriorBatch& batch) const {
  const Eigen::MatrixXd probs = net_.Evaluate(Inputs(batch.features, batch.z));
  Eigen::VectorXd p(batch.size());
  for (std::size_t n = 0; n < batch.size(); ++n) p(n) = probs(batch.actions[n], n);
  return p;
}

Eigen::VectorXd MlpPosterior::Distribution(std::span<const double> features,
                                           double z) const {
  Eigen::MatrixXd f = Eigen::Map<const Eigen::VectorXd>(features.data(), features.size());
  const double zs[1] = {z};
  return net_.Evaluate(Inputs(f, zs)).col(0);
}

double MlpPosterior::BufferLoss() const {
  if (actions_.empty()) return 0.0;
  const Eigen::Index n = static_cast<Eigen::Index>(actions_.size());
  Eigen::MatrixXd x(obs_dim_ + 1, n);
  for (Eigen::Index k = 0; k < n; ++k) x.col(k) = inputs_[k];
  const Eigen::MatrixXd probs = net_.Evaluate(x);
  double loss = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) loss -= std::log(probs(actions_[k], k));
  return loss / static_cast<double>(n);
}

PosteriorStore::PosteriorStore(const Options& options) : options_(options) {
  const int n = options.num_agents;
  if (n < 2) throw ConfigError("posterior store needs at least two agents");
  if (options.pairwise) {
    pairs_.resize(n * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) pairs_[i * n + j] = Make(DeriveSeed(options.seed, {0, std::uint64_t(i), std::uint64_t(j)}));
      }
    }
  }
  if (options.summed) {
    for (int i = 0; i < n; ++i) {
      summed_.push_back(Make(DeriveSeed(options.seed, {1, std::uint64_t(i)})));
    }
  }
}

std::unique_ptr<ActionPosterior> PosteriorStore::Make(std::uint64_t seed) const {
  if (options_.backend == PosteriorBackend::kTable) {
    return std::make_unique<PosteriorTable>(options_.num_obs_keys,
                                            options_.num_bins, options_.window);
  }
  MlpPosteriorOptions mlp;
  mlp.gamma = options_.gamma;
  return std::make_unique<MlpPosterior>(options_.obs_dim, seed, mlp);
}

ActionPosterior& PosteriorStore::Pair(int i, int j) {
  return const_cast<ActionPosterior&>(std::as_const(*this).Pair(i, j));
}

const ActionPosterior& PosteriorStore::Pair(int i, int j) const {
  const int n = options_.num_agents;
  if (pairs_.empty() || i < 0 || j < 0 || i >= n || j >= n || i == j) {
    throw UsageError("no posterior for agent pair (" + std::to_string(i) + "," +
                     std::to_string(j) + ")");
  }
  return *pairs_[i * n + j];
}

ActionPosterior& PosteriorStore::Summed(int i) {
  return const_cast<ActionPosterior&>(std::as_const(*this).Summed(i));
}

const ActionPosterior& PosteriorStore::Summed(int i) const {
  if (summed_.empty() || i < 0 || i >= options_.num_agents) {
    throw UsageError("no summed-novelty posterior for agent " + std::to_string(i));
  }
  return *summed_[i];
}

}  // namespace mace
