#include "mace/novelty.h"

#include <cmath>
#include <sstream>

#include "mace/errors.h"
#include "mace/rng.h"

namespace mace {

double CountNovelty(std::int64_t visit_count) {
  if (visit_count < 1) {
    throw UsageError("novelty queried for an unvisited cell");
  }
  return 10.0 / std::sqrt(static_cast<double>(visit_count));
}

VisitCountTable::VisitCountTable(int grid_size)
    : size_(grid_size), counts_(std::size_t(grid_size) * grid_size, 0) {
  if (grid_size <= 0) throw ConfigError("visit table needs a positive size");
}

int VisitCountTable::Index(int x, int y) const {
  if (x < 0 || y < 0 || x >= size_ || y >= size_) {
    throw UsageError("visit table coordinate out of bounds");
  }
  return y * size_ + x;
}

void VisitCountTable::Record(int x, int y) {
  ++counts_[Index(x, y)];
  ++total_;
}

std::int64_t VisitCountTable::Count(int x, int y) const {
  return counts_[Index(x, y)];
}

double VisitCountTable::Novelty(int x, int y) const {
  return CountNovelty(Count(x, y));
}

double VisitCountTable::RecordAndQuery(int x, int y) {
  const int idx = Index(x, y);
  ++total_;
  return CountNovelty(++counts_[idx]);
}

std::string VisitCountTable::Dump() const {
  std::ostringstream out;
  for (int y = 0; y < size_; ++y) {
    for (int x = 0; x < size_; ++x) {
      if (x) out << ' ';
      out << counts_[y * size_ + x];
    }
    out << '\n';
  }
  return out.str();
}

RndEstimator::RndEstimator(int input_dim, std::uint64_t seed,
                           RndOptions options)
    : options_(std::move(options)) {
  NetworkSpec target_spec{input_dim, options_.target_hidden,
                          options_.output_dim, Head::kLinear};
  NetworkSpec predictor_spec{input_dim, options_.predictor_hidden,
                             options_.output_dim, Head::kLinear};
  target_ = Network(target_spec, DeriveSeed(seed, {0}));
  predictor_ = Network(predictor_spec, DeriveSeed(seed, {1}));
  AdamOptions adam;
  adam.learning_rate = options_.learning_rate;
  adam.epsilon = options_.epsilon;
  adam.max_grad_norm = 0.0;
  optimizer_ = Adam(predictor_.num_parameters(), adam);
}

double RndEstimator::Novelty(std::span<const double> obs) const {
  return (predictor_.Evaluate(obs) - target_.Evaluate(obs)).norm();
}

Eigen::VectorXd RndEstimator::Novelty(const Eigen::MatrixXd& batch) const {
  const Eigen::MatrixXd diff = predictor_.Evaluate(batch) - target_.Evaluate(batch);
  return diff.colwise().norm().transpose();
}

double RndEstimator::Update(const Eigen::MatrixXd& batch) {
  if (batch.cols() == 0) throw UsageError("RND update needs a nonempty batch");
  const Eigen::MatrixXd target = target_.Evaluate(batch);
  const Eigen::MatrixXd diff = predictor_.Forward(batch) - target;
  const double scale = 1.0 / static_cast<double>(diff.size());
  const double loss = diff.squaredNorm() * scale;
  const Eigen::VectorXd grad = predictor_.Backward(2.0 * scale * diff);
  optimizer_.Step(predictor_.parameters(), grad);
  predictor_.ClearCache();
  return loss;
}

void RndEstimator::SyncPredictorToTarget() {
  if (predictor_.layer_sizes() != target_.layer_sizes()) {
    throw UsageError("predictor and target architectures differ");
  }
  predictor_.parameters() = target_.parameters();
}

}  // namespace mace
