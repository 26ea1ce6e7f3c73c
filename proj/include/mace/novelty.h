#ifndef MACE_NOVELTY_H_
#define MACE_NOVELTY_H_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mace/mlp.h"

namespace mace {

// 10 / sqrt(n). Requires n >= 1.
double CountNovelty(std::int64_t visit_count);

// Per-agent visit counts over (x, y) cells.
class VisitCountTable {
 public:
  VisitCountTable() = default;
  explicit VisitCountTable(int grid_size);

  void Record(int x, int y);
  std::int64_t Count(int x, int y) const;
  // Novelty of an already-recorded cell; throws UsageError when unvisited.
  double Novelty(int x, int y) const;
  // Record-then-query, the order used for u_t = novelty(o_{t+1}).
  double RecordAndQuery(int x, int y);

  std::int64_t total_visits() const { return total_; }
  int grid_size() const { return size_; }

  // Whitespace-separated matrix, one grid row per line.
  std::string Dump() const;

 private:
  int Index(int x, int y) const;

  int size_ = 0;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

struct RndOptions {
  std::vector<int> target_hidden = {64, 64};
  std::vector<int> predictor_hidden = {64, 64, 64, 64};
  int output_dim = 32;
  double learning_rate = 3e-4;
  double epsilon = 1e-5;
};

// Random-network-distillation novelty: distance between a trainable
// predictor and a frozen random target network.
class RndEstimator {
 public:
  RndEstimator() = default;
  RndEstimator(int input_dim, std::uint64_t seed, RndOptions options = {});

  // ||f(o; theta) - f_target(o)||_2
  double Novelty(std::span<const double> obs) const;
  // Column-wise novelty for an (input_dim x batch) matrix.
  Eigen::VectorXd Novelty(const Eigen::MatrixXd& batch) const;

  // One Adam step on the mean squared prediction error of the batch (mean
  // over samples and output units). Returns the loss before the step.
  // Throws UsageError on an empty batch.
  double Update(const Eigen::MatrixXd& batch);

  // Copies the target parameters into the predictor. Requires identical
  // architectures.
  void SyncPredictorToTarget();

  std::uint64_t TargetHash() const { return target_.ParameterHash(); }
  const Network& target() const { return target_; }
  const Network& predictor() const { return predictor_; }
  std::int64_t updates() const { return optimizer_.step_count(); }

 private:
  RndOptions options_;
  Network target_;
  Network predictor_;
  Adam optimizer_;
};

}  // namespace mace

#endif  // MACE_NOVELTY_H_
