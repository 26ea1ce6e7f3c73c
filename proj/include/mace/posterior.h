#ifndef MACE_POSTERIOR_H_
#define MACE_POSTERIOR_H_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <vector>

#include "mace/grid_env.h"
#include "mace/mlp.h"

namespace mace {

// Samples of (a^i, o^i, z^j) for one ordered agent pair, in the two
// encodings the backends consume: discrete (obs key, z bin) for the count
// table, dense (features, z) for function approximators.
struct PosteriorBatch {
  std::vector<int> actions;
  std::vector<std::int64_t> obs_keys;
  std::vector<int> bins;
  Eigen::MatrixXd features;  // obs_dim x n; may be empty for tables
  std::vector<double> z;     // may be empty for tables

  std::size_t size() const { return actions.size(); }
};

// Estimate of p(a^i | o^i, z^j).
class ActionPosterior {
 public:
  virtual ~ActionPosterior() = default;

  virtual void Update(const PosteriorBatch& batch) = 0;
  // p_hat(a_n | o_n, z_n) for each sample's own action.
  virtual Eigen::VectorXd Probabilities(const PosteriorBatch& batch) const = 0;
  virtual bool needs_features() const = 0;
};

// n(a, o, bin) / n(o, bin) over the last `window` batches. Unseen (o, bin)
// pairs fall back to the uniform distribution.
class PosteriorTable : public ActionPosterior {
 public:
  PosteriorTable(std::int64_t num_obs_keys, int num_bins, int window);

  // Adds one sampling batch; evicts the oldest when more than `window`
  // batches are held.
  void Update(const PosteriorBatch& batch) override;
  Eigen::VectorXd Probabilities(const PosteriorBatch& batch) const override;
  bool needs_features() const override { return false; }

  std::array<double, kNumActions> Query(std::int64_t obs_key, int bin) const;
  std::uint32_t Count(int action, std::int64_t obs_key, int bin) const;
  std::uint32_t Count(std::int64_t obs_key, int bin) const;

  int batches_held() const { return static_cast<int>(history_.size()); }
  int window() const { return window_; }
  int num_bins() const { return num_bins_; }
  std::int64_t num_obs_keys() const { return num_obs_keys_; }

 private:
  std::int64_t Slot(std::int64_t obs_key, int bin) const;

  std::int64_t num_obs_keys_;
  int num_bins_;
  int window_;
  std::vector<std::uint32_t> action_counts_;  // [slot * A + a]
  std::vector<std::uint32_t> slot_counts_;    // [slot]
  std::deque<std::vector<std::uint32_t>> history_;  // action-count indices
};

struct MlpPosteriorOptions {
  std::vector<int> hidden = {64, 64};
  double learning_rate = 3e-4;
  double epsilon = 1e-5;
  int epochs = 40;
  std::int64_t buffer_size = 100000;
  // z is fed to the network as z * (1 - gamma).
  double gamma = 0.99;
};

// Softmax MLP on (obs features, scaled z), trained by cross-entropy on a
// FIFO buffer of recent samples, full batch, `epochs` steps per Update.
class MlpPosterior : public ActionPosterior {
 public:
  MlpPosterior(int obs_dim, std::uint64_t seed, MlpPosteriorOptions options = {});

  void Update(const PosteriorBatch& batch) override;
  Eigen::VectorXd Probabilities(const PosteriorBatch& batch) const override;
  bool needs_features() const override { return true; }

  // Full distribution for a single (features, z) query.
  Eigen::VectorXd Distribution(std::span<const double> features, double z) const;
  // Mean cross-entropy of the buffer under the current network.
  double BufferLoss() const;
  std::int64_t buffered() const { return static_cast<std::int64_t>(actions_.size()); }

 private:
  Eigen::MatrixXd Inputs(const Eigen::MatrixXd& features,
                         std::span<const double> z) const;

  int obs_dim_;
  MlpPosteriorOptions options_;
  Network net_;
  Adam optimizer_;
  std::deque<Eigen::VectorXd> inputs_;
  std::deque<int> actions_;
};

enum class PosteriorBackend { kTable, kMlp };

// One posterior per ordered agent pair (i, j), i != j, plus one per agent
// conditioned on the summed novelty of all other agents.
class PosteriorStore {
 public:
  struct Options {
    PosteriorBackend backend = PosteriorBackend::kTable;
    int num_agents = 2;
    std::int64_t num_obs_keys = 0;
    int obs_dim = 0;
    int num_bins = 30;
    int window = 10;
    double gamma = 0.99;
    bool pairwise = true;
    bool summed = false;
    std::uint64_t seed = 0;
  };

  explicit PosteriorStore(const Options& options);

  ActionPosterior& Pair(int i, int j);
  const ActionPosterior& Pair(int i, int j) const;
  ActionPosterior& Summed(int i);
  const ActionPosterior& Summed(int i) const;

  bool has_pairwise() const { return !pairs_.empty(); }
  bool has_summed() const { return !summed_.empty(); }
  const Options& options() const { return options_; }

 private:
  std::unique_ptr<ActionPosterior> Make(std::uint64_t seed) const;

  Options options_;
  std::vector<std::unique_ptr<ActionPosterior>> pairs_;  // [i * N + j]
  std::vector<std::unique_ptr<ActionPosterior>> summed_;
};

}  // namespace mace

#endif  // MACE_POSTERIOR_H_
