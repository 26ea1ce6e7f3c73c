#ifndef MACE_WMI_H_
#define MACE_WMI_H_

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace mace {

// Joint distribution p(a, z) over a finite action set (rows) and a finite
// set of numeric outcomes z (columns). The outcome values double as the
// WMI weights omega(a, z) = z.
class DiscreteJoint {
 public:
  // Throws UsageError if p has a negative entry, does not sum to 1 within
  // 1e-9, or its column count differs from outcomes.size().
  DiscreteJoint(std::vector<double> outcomes, Eigen::MatrixXd p);

  // p(a, z) = p(a) p(z | a).
  static DiscreteJoint FromConditionals(std::vector<double> outcomes,
                                        std::span<const double> action_probs,
                                        const Eigen::MatrixXd& conditionals);

  int num_actions() const { return static_cast<int>(p_.rows()); }
  int num_outcomes() const { return static_cast<int>(p_.cols()); }
  const std::vector<double>& outcomes() const { return outcomes_; }
  const Eigen::MatrixXd& p() const { return p_; }
  const Eigen::VectorXd& action_marginal() const { return pa_; }
  const Eigen::RowVectorXd& outcome_marginal() const { return pz_; }

 private:
  std::vector<double> outcomes_;
  Eigen::MatrixXd p_;
  Eigen::VectorXd pa_;
  Eigen::RowVectorXd pz_;
};

// sum p(a,z) log(p(a,z) / (p(a) p(z))), natural log, 0 log 0 = 0.
double MutualInformation(const DiscreteJoint& joint);
// sum p(a,z) z log(p(a,z) / (p(a) p(z))).
double WeightedMutualInformation(const DiscreteJoint& joint);
// log(p(a,z) / (p(a) p(z))); throws UsageError on a zero marginal.
double PointwiseMutualInformation(const DiscreteJoint& joint, int action,
                                  int outcome);

// The two illustrative two-action, three-outcome states (outcomes 1, 5, 9):
//   state 1: p(.|a1) = (0.1, 0.8, 0.1), p(.|a2) = (0.8, 0.1, 0.1)
//   state 2: p(.|a1) = (0.1, 0.8, 0.1), p(.|a2) = (0.1, 0.1, 0.8)
DiscreteJoint IllustrativeState(int state, double p_a1);

struct SweepRow {
  double p_a1;
  double mi_s1;
  double mi_s2;
  double wmi_s1;
  double wmi_s2;
};

std::vector<SweepRow> IllustrativeSweep(std::span<const double> p_a1_grid);

}  // namespace mace

#endif  // MACE_WMI_H_
