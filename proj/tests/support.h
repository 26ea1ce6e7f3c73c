#ifndef MACE_TESTS_SUPPORT_H_
#define MACE_TESTS_SUPPORT_H_

#include <cstdint>
#include <vector>

#include "mace/mlp.h"
#include "mace/posterior.h"
#include "mace/trainer.h"
#include "mace/wmi.h"

namespace mace::testing {

// Max relative error between Backward and central differences of
// L = sum(c .* net(x)) over every parameter, with the denominator
// max(|analytic|, |numeric|, 1e-6).
double GradientCheck(Network& net, const Eigen::MatrixXd& inputs,
                     const Eigen::MatrixXd& coeffs, double h = 1e-5);

// Random architecture (1-3 hidden layers of width 2-16, either head) with
// matching random inputs and loss coefficients.
struct GradientCase {
  Network net;
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd coeffs;
};
GradientCase RandomGradientCase(std::uint64_t seed);

// Dirichlet(1) joint over actions x outcomes with outcome values drawn
// uniformly from (0, 1).
DiscreteJoint RandomJoint(int actions, int outcomes, std::uint64_t seed);

// Mean of HindsightReward(z, p(a|z), p(a)) over `draws` samples of (a, z).
double MonteCarloWmi(const DiscreteJoint& joint, int draws, std::uint64_t seed);

// Recomputes p_hat(a | key, bin) from the raw samples of the given batches.
std::array<double, kNumActions> BruteForcePosterior(
    const std::vector<PosteriorBatch>& batches, std::int64_t key, int bin);

PosteriorBatch RandomPosteriorBatch(int size, std::int64_t num_keys,
                                    int num_bins, Rng& rng);

// Small, fast Pass config for trainer tests.
RunConfig TinyConfig(RewardMode mode, int iterations);

bool SameCurves(const std::vector<IterationRecord>& a,
                const std::vector<IterationRecord>& b);

}  // namespace mace::testing

#endif  // MACE_TESTS_SUPPORT_H_
