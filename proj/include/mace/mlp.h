#ifndef MACE_MLP_H_
#define MACE_MLP_H_

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace mace {

enum class Head : std::uint8_t { kLinear = 0, kSoftmax = 1 };

struct NetworkSpec {
  int input_dim = 0;
  std::vector<int> hidden;
  int output_dim = 0;
  Head head = Head::kLinear;
  // Orthogonal init gains; biases start at zero.
  double hidden_gain = 1.4142135623730951;
  double output_gain = 1.0;
};

// Feed-forward ReLU network with a linear or softmax head. Parameters live
// in one flat vector (per layer: weight matrix column-major, then bias) so
// optimizers and checkpoints treat them uniformly.
//
// Batched calls take inputs as (input_dim x batch) matrices.
class Network {
 public:
  Network() = default;
  Network(const NetworkSpec& spec, std::uint64_t seed);

  // Inference without touching the backward cache; safe to call
  // concurrently on a shared const network.
  Eigen::MatrixXd Evaluate(const Eigen::MatrixXd& inputs) const;
  Eigen::VectorXd Evaluate(std::span<const double> input) const;

  // Forward pass that caches activations for Backward.
  const Eigen::MatrixXd& Forward(const Eigen::MatrixXd& inputs);
  // Pre-head outputs of the last Forward call.
  const Eigen::MatrixXd& logits() const { return activations_.back(); }

  // Reverse-mode gradient of a loss given dL/d(output) for the last Forward
  // batch; for softmax heads the softmax Jacobian is applied first.
  Eigen::VectorXd Backward(const Eigen::MatrixXd& output_grad) const;
  // Same, with the gradient taken with respect to the pre-head outputs.
  Eigen::VectorXd BackwardFromLogits(const Eigen::MatrixXd& logit_grad) const;
  void ClearCache();
  bool has_cache() const { return !activations_.empty(); }

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  std::int64_t num_parameters() const { return params_.size(); }
  const NetworkSpec& spec() const { return spec_; }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }

  // Flat binary checkpoint:
  //   char[8] "MACENET1", u32 num_sizes, u32 sizes[num_sizes], u8 head,
  //   then per layer the weight matrix (row-major, out x in) and the bias,
  //   all as little-endian float64.
  void Save(std::ostream& out) const;
  static Network Load(std::istream& in);

  // FNV-1a over the raw parameter bytes.
  std::uint64_t ParameterHash() const;

 private:
  struct LayerView {
    std::int64_t weight_offset;
    std::int64_t bias_offset;
    int rows;
    int cols;
  };

  void BuildLayout();
  Eigen::Map<const Eigen::MatrixXd> Weight(std::size_t layer) const;
  Eigen::Map<Eigen::MatrixXd> Weight(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> Bias(std::size_t layer) const;
  Eigen::VectorXd BackwardLayers(Eigen::MatrixXd delta) const;

  NetworkSpec spec_;
  std::vector<int> sizes_;
  std::vector<LayerView> layers_;
  Eigen::VectorXd params_;

  // Backward cache: layer inputs (post-activation) and the final output.
  std::vector<Eigen::MatrixXd> activations_;
  Eigen::MatrixXd output_;
};

// Column-wise softmax with max subtraction.
Eigen::MatrixXd Softmax(const Eigen::MatrixXd& logits);

// Scales `grad` in place so its L2 norm is at most max_norm; returns the
// norm before clipping. max_norm <= 0 disables clipping.
double ClipGradientNorm(Eigen::VectorXd& grad, double max_norm);

struct AdamOptions {
  double learning_rate = 7e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-5;
  double max_grad_norm = 10.0;
};

// Adaptive-moment optimizer with bias correction, applied after global
// gradient-norm clipping.
class Adam {
 public:
  Adam() = default;
  Adam(std::int64_t num_parameters, AdamOptions options);

  // Returns the gradient norm before clipping.
  double Step(Eigen::VectorXd& parameters, Eigen::VectorXd grad);

  std::int64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }

 private:
  AdamOptions options_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  std::int64_t step_ = 0;
};

}  // namespace mace

#endif  // MACE_MLP_H_
