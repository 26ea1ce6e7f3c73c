#include "mace/mlp.h"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

#include "mace/errors.h"
#include "mace/rng.h"

namespace mace {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'C', 'E', 'N', 'E', 'T', '1'};

// Orthogonal (rows x cols) matrix scaled by gain, from the QR factorisation
// of a Gaussian matrix with the sign ambiguity of R's diagonal removed.
Eigen::MatrixXd OrthogonalMatrix(int rows, int cols, double gain, Rng& rng) {
  const int tall = std::max(rows, cols);
  const int wide = std::min(rows, cols);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(tall, wide);
  for (int j = 0; j < wide; ++j) {
    for (int i = 0; i < tall; ++i) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, wide);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(wide);
  for (int j = 0; j < wide; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  if (rows < cols) q.transposeInPlace();
  return gain * q;
}

template <typename T>
void WritePod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ConfigError("checkpoint: truncated stream");
  return value;
}

}  // namespace

Network::Network(const NetworkSpec& spec, std::uint64_t seed) : spec_(spec) {
  if (spec.input_dim <= 0 || spec.output_dim <= 0) {
    throw ConfigError("network dimensions must be positive");
  }
  sizes_.push_back(spec.input_dim);
  for (int h : spec.hidden) {
    if (h <= 0) throw ConfigError("hidden layer sizes must be positive");
    sizes_.push_back(h);
  }
  sizes_.push_back(spec.output_dim);
  BuildLayout();

  Rng rng(seed);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const bool last = l + 1 == layers_.size();
    Weight(l) = OrthogonalMatrix(layers_[l].rows, layers_[l].cols,
                                 last ? spec.output_gain : spec.hidden_gain,
                                 rng);
  }
}

void Network::BuildLayout() {
  layers_.clear();
  std::int64_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    LayerView view;
    view.rows = sizes_[l + 1];
    view.cols = sizes_[l];
    view.weight_offset = offset;
    offset += std::int64_t{view.rows} * view.cols;
    view.bias_offset = offset;
    offset += view.rows;
    layers_.push_back(view);
  }
  params_ = Eigen::VectorXd::Zero(offset);
}

Eigen::Map<const Eigen::MatrixXd> Network::Weight(std::size_t layer) const {
  const LayerView& v = layers_[layer];
  return {params_.data() + v.weight_offset, v.rows, v.cols};
}

Eigen::Map<Eigen::MatrixXd> Network::Weight(std::size_t layer) {
  const LayerView& v = layers_[layer];
  return {params_.data() + v.weight_offset, v.rows, v.cols};
}

Eigen::Map<const Eigen::VectorXd> Network::Bias(std::size_t layer) const {
  const LayerView& v = layers_[layer];
  return {params_.data() + v.bias_offset, v.rows};
}

Eigen::MatrixXd Softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    out.col(j) = (logits.col(j).array() - m).exp();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

Eigen::MatrixXd Network::Evaluate(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim()) {
    throw UsageError("network input has " + std::to_string(inputs.rows()) +
                     " rows, expected " + std::to_string(input_dim()));
  }
  Eigen::MatrixXd x = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = Weight(l) * x;
    z.colwise() += Bias(l);
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    x = std::move(z);
  }
  return spec_.head == Head::kSoftmax ? Softmax(x) : x;
}

Eigen::VectorXd Network::Evaluate(std::span<const double> input) const {
  Eigen::Map<const Eigen::VectorXd> v(input.data(), input.size());
  return Evaluate(Eigen::MatrixXd(v)).col(0);
}

const Eigen::MatrixXd& Network::Forward(const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != input_dim()) {
    throw UsageError("network input has " + std::to_string(inputs.rows()) +
                     " rows, expected " + std::to_string(input_dim()));
  }
  activations_.resize(layers_.size() + 1);
  activations_[0] = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = Weight(l) * activations_[l];
    z.colwise() += Bias(l);
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    activations_[l + 1] = std::move(z);
  }
  output_ = spec_.head == Head::kSoftmax ? Softmax(activations_.back())
                                         : activations_.back();
  return output_;
}

void Network::ClearCache() {
  activations_.clear();
  output_.resize(0, 0);
}

Eigen::VectorXd Network::Backward(const Eigen::MatrixXd& output_grad) const {
  if (!has_cache()) throw UsageError("backward called without a forward pass");
  if (spec_.head == Head::kLinear) return BackwardFromLogits(output_grad);
  // d/dz softmax: p * (g - <p, g>)
  Eigen::MatrixXd delta = output_.cwiseProduct(output_grad);
  const Eigen::RowVectorXd inner = delta.colwise().sum();
  delta -= output_ * inner.asDiagonal();
  return BackwardLayers(std::move(delta));
}

Eigen::VectorXd Network::BackwardFromLogits(
    const Eigen::MatrixXd& logit_grad) const {
  if (!has_cache()) throw UsageError("backward called without a forward pass");
  return BackwardLayers(logit_grad);
}

Eigen::VectorXd Network::BackwardLayers(Eigen::MatrixXd delta) const {
  const Eigen::MatrixXd& out = activations_.back();
  if (delta.rows() != out.rows() || delta.cols() != out.cols()) {
    throw UsageError("output gradient shape does not match the cached batch");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const LayerView& v = layers_[l];
    const Eigen::MatrixXd& input = activations_[l];
    Eigen::Map<Eigen::MatrixXd>(grad.data() + v.weight_offset, v.rows,
                                v.cols)
        .noalias() = delta * input.transpose();
    grad.segment(v.bias_offset, v.rows) = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd upstream = Weight(l).transpose() * delta;
      delta = upstream.cwiseProduct(
          (input.array() > 0.0).cast<double>().matrix());
    }
  }
  return grad;
}

void Network::Save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  WritePod<std::uint32_t>(out, static_cast<std::uint32_t>(sizes_.size()));
  for (int s : sizes_) WritePod<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  WritePod<std::uint8_t>(out, static_cast<std::uint8_t>(spec_.head));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto w = Weight(l);
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) WritePod<double>(out, w(r, c));
    }
    const auto b = Bias(l);
    for (int r = 0; r < b.size(); ++r) WritePod<double>(out, b(r));
  }
  if (!out) throw ConfigError("checkpoint: write failed");
}

Network Network::Load(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ConfigError("checkpoint: bad magic");
  }
  const auto count = ReadPod<std::uint32_t>(in);
  if (count < 2 || count > 64) throw ConfigError("checkpoint: bad layer count");
  Network net;
  for (std::uint32_t i = 0; i < count; ++i) {
    net.sizes_.push_back(static_cast<int>(ReadPod<std::uint32_t>(in)));
  }
  net.spec_.input_dim = net.sizes_.front();
  net.spec_.output_dim = net.sizes_.back();
  net.spec_.hidden.assign(net.sizes_.begin() + 1, net.sizes_.end() - 1);
  const auto head = ReadPod<std::uint8_t>(in);
  if (head > 1) throw ConfigError("checkpoint: bad head");
  net.spec_.head = static_cast<Head>(head);
  net.BuildLayout();
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    auto w = net.Weight(l);
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) w(r, c) = ReadPod<double>(in);
    }
    const LayerView& v = net.layers_[l];
    for (int r = 0; r < v.rows; ++r) {
      net.params_(v.bias_offset + r) = ReadPod<double>(in);
    }
  }
  return net;
}

std::uint64_t Network::ParameterHash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(params_.data());
  for (std::size_t i = 0; i < params_.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

double ClipGradientNorm(Eigen::VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (max_norm > 0.0 && norm > max_norm) grad *= max_norm / (norm + 1e-6);
  return norm;
}

Adam::Adam(std::int64_t num_parameters, AdamOptions options)
    : options_(options),
      m_(Eigen::VectorXd::Zero(num_parameters)),
      v_(Eigen::VectorXd::Zero(num_parameters)) {}

double Adam::Step(Eigen::VectorXd& parameters, Eigen::VectorXd grad) {
  if (grad.size() != parameters.size() || grad.size() != m_.size()) {
    throw UsageError("optimizer shape mismatch");
  }
  const double norm = ClipGradientNorm(grad, options_.max_grad_norm);
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  m_ = b1 * m_ + (1.0 - b1) * grad;
  v_ = b2 * v_ + (1.0 - b2) * grad.cwiseAbs2();
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double step_size = options_.learning_rate / bias1;
  parameters.array() -=
      step_size * m_.array() /
      ((v_.array() / bias2).sqrt() + options_.epsilon);
  return norm;
}

}  // namespace mace
