#include "mace/wmi.h"

#include <cmath>
#include <string>

#include "mace/errors.h"

namespace mace {

DiscreteJoint::DiscreteJoint(std::vector<double> outcomes, Eigen::MatrixXd p)
    : outcomes_(std::move(outcomes)), p_(std::move(p)) {
  if (p_.size() == 0 || p_.cols() != static_cast<Eigen::Index>(outcomes_.size())) {
    throw UsageError("joint: outcome count does not match the table");
  }
  if ((p_.array() < 0.0).any() || !p_.allFinite()) {
    throw UsageError("joint: negative or non-finite probability");
  }
  const double total = p_.sum();
  if (std::abs(total - 1.0) > 1e-9) {
    throw UsageError("joint: probabilities sum to " + std::to_string(total));
  }
  pa_ = p_.rowwise().sum();
  pz_ = p_.colwise().sum();
}

DiscreteJoint DiscreteJoint::FromConditionals(
    std::vector<double> outcomes, std::span<const double> action_probs,
    const Eigen::MatrixXd& conditionals) {
  if (conditionals.rows() != static_cast<Eigen::Index>(action_probs.size())) {
    throw UsageError("joint: one conditional row per action required");
  }
  Eigen::MatrixXd p = conditionals;
  for (Eigen::Index a = 0; a < p.rows(); ++a) p.row(a) *= action_probs[a];
  return DiscreteJoint(std::move(outcomes), std::move(p));
}

namespace {

double WeightedSum(const DiscreteJoint& joint, bool weighted) {
  double total = 0.0;
  for (int a = 0; a < joint.num_actions(); ++a) {
    for (int k = 0; k < joint.num_outcomes(); ++k) {
      const double pj = joint.p()(a, k);
      if (pj <= 0.0) continue;
      const double pmi = std::log(pj / (joint.action_marginal()(a) *
                                        joint.outcome_marginal()(k)));
      total += pj * (weighted ? joint.outcomes()[k] : 1.0) * pmi;
    }
  }
  return total;
}

}  // namespace

double MutualInformation(const DiscreteJoint& joint) {
  return WeightedSum(joint, false);
}

double WeightedMutualInformation(const DiscreteJoint& joint) {
  return WeightedSum(joint, true);
}

double PointwiseMutualInformation(const DiscreteJoint& joint, int action,
                                  int outcome) {
  if (action < 0 || action >= joint.num_actions() || outcome < 0 ||
      outcome >= joint.num_outcomes()) {
    throw UsageError("pmi: index out of range");
  }
  const double pa = joint.action_marginal()(action);
  const double pz = joint.outcome_marginal()(outcome);
  if (pa <= 0.0 || pz <= 0.0) throw UsageError("pmi: zero marginal");
  return std::log(joint.p()(action, outcome) / (pa * pz));
}

DiscreteJoint IllustrativeState(int state, double p_a1) {
  if (state != 1 && state != 2) throw UsageError("state must be 1 or 2");
  if (!(p_a1 > 0.0 && p_a1 < 1.0)) throw UsageError("p(a1) must lie in (0, 1)");
  Eigen::MatrixXd cond(2, 3);
  cond.row(0) << 0.1, 0.8, 0.1;
  if (state == 1) {
    cond.row(1) << 0.8, 0.1, 0.1;
  } else {
    cond.row(1) << 0.1, 0.1, 0.8;
  }
  const double pa[2] = {p_a1, 1.0 - p_a1};
  return DiscreteJoint::FromConditionals({1.0, 5.0, 9.0}, pa, cond);
}

std::vector<SweepRow> IllustrativeSweep(std::span<const double> p_a1_grid) {
  std::vector<SweepRow> rows;
  rows.reserve(p_a1_grid.size());
  for (double p : p_a1_grid) {
    const DiscreteJoint s1 = IllustrativeState(1, p);
    const DiscreteJoint s2 = IllustrativeState(2, p);
    rows.push_back({p, MutualInformation(s1), MutualInformation(s2),
                    WeightedMutualInformation(s1), WeightedMutualInformation(s2)});
  }
  return rows;
}

}  // namespace mace
