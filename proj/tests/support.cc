#include "support.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "mace/rewards.h"

namespace mace::testing {

namespace {

double Loss(const Network& net, const Eigen::MatrixXd& inputs,
            const Eigen::MatrixXd& coeffs) {
  return (net.Evaluate(inputs).array() * coeffs.array()).sum();
}

}  // namespace

double GradientCheck(Network& net, const Eigen::MatrixXd& inputs,
                     const Eigen::MatrixXd& coeffs, double h) {
  net.Forward(inputs);
  const Eigen::VectorXd analytic = net.Backward(coeffs);
  net.ClearCache();
  Eigen::VectorXd& params = net.parameters();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    const double saved = params(k);
    params(k) = saved + h;
    const double up = Loss(net, inputs, coeffs);
    params(k) = saved - h;
    const double down = Loss(net, inputs, coeffs);
    params(k) = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic(k)), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic(k) - numeric) / denom);
  }
  return worst;
}

GradientCase RandomGradientCase(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> width(2, 16);
  std::uniform_int_distribution<int> depth(1, 3);
  NetworkSpec spec;
  spec.input_dim = width(rng);
  const int layers = depth(rng);
  for (int l = 0; l < layers; ++l) spec.hidden.push_back(width(rng));
  spec.output_dim = std::uniform_int_distribution<int>(1, 6)(rng);
  spec.head = (rng() & 1) ? Head::kSoftmax : Head::kLinear;
  spec.output_gain = 1.0;
  GradientCase c{Network(spec, rng()), {}, {}};
  // Perturb the zero-initialized biases so every parameter class is exercised.
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index k = 0; k < c.net.num_parameters(); ++k) {
    c.net.parameters()(k) += 0.1 * normal(rng);
  }
  const int batch = 3;
  c.inputs = Eigen::MatrixXd::NullaryExpr(spec.input_dim, batch, [&] { return normal(rng); });
  c.coeffs = Eigen::MatrixXd::NullaryExpr(spec.output_dim, batch, [&] { return normal(rng); });
  return c;
}

DiscreteJoint RandomJoint(int actions, int outcomes, std::uint64_t seed) {
  Rng rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd p(actions, outcomes);
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = expo(rng);
  p /= p.sum();
  std::vector<double> z(outcomes);
  for (double& v : z) v = unit(rng);
  return DiscreteJoint(std::move(z), std::move(p));
}

double MonteCarloWmi(const DiscreteJoint& joint, int draws, std::uint64_t seed) {
  Rng rng(seed);
  const int na = joint.num_actions();
  std::vector<double> weights(joint.p().data(), joint.p().data() + joint.p().size());
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  double sum = 0.0;
  for (int d = 0; d < draws; ++d) {
    const int cell = pick(rng);  // column-major: cell = z * na + a
    const int a = cell % na;
    const int k = cell / na;
    const double posterior = joint.p()(a, k) / joint.outcome_marginal()(k);
    sum += HindsightReward(joint.outcomes()[k], posterior, joint.action_marginal()(a));
  }
  return sum / draws;
}

std::array<double, kNumActions> BruteForcePosterior(
    const std::vector<PosteriorBatch>& batches, std::int64_t key, int bin) {
  std::array<double, kNumActions> counts{};
  double total = 0.0;
  for (const PosteriorBatch& b : batches) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (b.obs_keys[k] == key && b.bins[k] == bin) {
        counts[b.actions[k]] += 1.0;
        total += 1.0;
      }
    }
  }
  if (total == 0.0) {
    counts.fill(1.0 / kNumActions);
    return counts;
  }
  for (double& c : counts) c /= total;
  return counts;
}

PosteriorBatch RandomPosteriorBatch(int size, std::int64_t num_keys,
                                    int num_bins, Rng& rng) {
  PosteriorBatch b;
  std::uniform_int_distribution<std::int64_t> key(0, num_keys - 1);
  std::uniform_int_distribution<int> bin(0, num_bins - 1);
  std::uniform_int_distribution<int> action(0, kNumActions - 1);
  for (int k = 0; k < size; ++k) {
    b.actions.push_back(action(rng));
    b.obs_keys.push_back(key(rng));
    b.bins.push_back(bin(rng));
  }
  return b;
}

RunConfig TinyConfig(RewardMode mode, int iterations) {
  RunConfig c;
  c.task = TaskName::kPass;
  c.grid_size = 9;
  c.max_steps = 40;
  c.mode = mode;
  c.num_envs = 2;
  c.buffer_length = 40;
  c.iterations = iterations;
  c.ppo.epochs = 2;
  c.ppo.hidden = {16, 16};
  c.decomposition_log = false;
  return c;
}

bool SameCurves(const std::vector<IterationRecord>& a,
                const std::vector<IterationRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].iteration != b[k].iteration || a[k].env_steps != b[k].env_steps ||
        a[k].mean_episode_reward != b[k].mean_episode_reward ||
        a[k].mean_r_nov != b[k].mean_r_nov ||
        a[k].success_rate != b[k].success_rate ||
        a[k].episodes != b[k].episodes) {
      return false;
    }
  }
  return true;
}

}  // namespace mace::testing
