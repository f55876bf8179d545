#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcre/lifted_chain.hpp"
#include "mcre/model.hpp"
#include "mcre/rng.hpp"
#include "mcre/simulator.hpp"

namespace mcre {

/// Tabular predictor f: H^N x B^N -> B^N.
class Hypothesis {
 public:
  Hypothesis(std::size_t joint_feedbacks, std::size_t joint_behaviors, std::vector<std::size_t> table,
             std::string name = {});

  std::size_t predict(std::size_t h, std::size_t b) const { return table_[h * joint_behaviors_ + b]; }
  const std::vector<std::size_t>& table() const noexcept { return table_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t joint_feedbacks() const noexcept { return joint_feedbacks_; }
  std::size_t joint_behaviors() const noexcept { return joint_behaviors_; }

  // Tables only; names are labels.
  friend bool operator==(const Hypothesis& a, const Hypothesis& b) { return a.table_ == b.table_; }

 private:
  std::size_t joint_feedbacks_;
  std::size_t joint_behaviors_;
  std::vector<std::size_t> table_;
  std::string name_;
};

class HypothesisClass {
 public:
  // Throws ModelError when empty, when members disagree in shape, or on duplicates.
  explicit HypothesisClass(std::vector<Hypothesis> members);

  std::size_t size() const noexcept { return members_.size(); }
  const Hypothesis& operator[](std::size_t i) const { return members_.at(i); }
  const std::vector<Hypothesis>& members() const noexcept { return members_; }

 private:
  std::vector<Hypothesis> members_;
};

enum class LossKind {
  ZeroOneJoint,     // 1{f(h,b) != b_next}, B = 1
  HammingPerAgent,  // number of agents mispredicted, B = N
};

class LossFunction {
 public:
  LossFunction(LossKind kind, const JointSpace& behaviors) : kind_(kind), behaviors_(behaviors) {}

  LossKind kind() const noexcept { return kind_; }
  double bound() const noexcept {
    return kind_ == LossKind::ZeroOneJoint ? 1.0 : static_cast<double>(behaviors_.agents());
  }

  double operator()(const Hypothesis& f, const LiftedState& z) const {
    const std::size_t predicted = f.predict(z.h, z.b);
    if (kind_ == LossKind::ZeroOneJoint) return predicted == z.b_next ? 0.0 : 1.0;
    double wrong = 0.0;
    for (std::size_t a = 0; a < behaviors_.agents(); ++a)
      wrong += behaviors_.digit(predicted, a) != behaviors_.digit(z.b_next, a) ? 1.0 : 0.0;
    return wrong;
  }

 private:
  LossKind kind_;
  JointSpace behaviors_;
};

struct RiskReport {
  double empirical = 0.0;
  double expected = 0.0;
  double gap = 0.0;
};

std::vector<double> loss_trace(const Hypothesis& f, const Trajectory& traj, const LossFunction& loss);

/// (1/T) sum_t l(f, z_t). Throws std::invalid_argument on an empty trajectory.
double empirical_risk(const Hypothesis& f, const Trajectory& traj, const LossFunction& loss);

/// sum_z pi(z) l(f, z) over the lifted state space.
double expected_risk(const Hypothesis& f, const LiftedChain& chain, const Vector& pi,
                     const LossFunction& loss);

struct ErmResult {
  std::size_t index = 0;
  double empirical_risk = 0.0;
  std::vector<double> member_risks;
};

// Minimal empirical risk; ties go to the lowest member index.
ErmResult erm(const HypothesisClass& cls, const Trajectory& traj, const LossFunction& loss);

inline constexpr std::size_t kExactCoverLimit = 20;

struct CoverResult {
  std::size_t size = 0;
  bool exact = true;  // false: greedy upper bound
  std::size_t distinct_traces = 0;
};

/// Minimum number of member loss traces whose closed sup-metric balls of radius
/// eps cover every trace. Exhaustive for classes of at most 20 members,
/// greedy (an upper bound) above that.
CoverResult covering_number_on_sample(const HypothesisClass& cls, const LossFunction& loss,
                                      const Trajectory& traj, double eps);

/// (2 T e (|B|+1)^2 / (2d))^d, the growth-function bound for Natarajan dimension d.
double growth_bound(double rounds, std::size_t behavior_count, std::size_t natarajan_d);

// Reference predictors for a model.
Hypothesis bayes_rule(const McreModel& model);  // per-agent argmax of M^i_{h_i}(b_i, .)
Hypothesis stay_rule(const McreModel& model);   // predicts b_next = b
Hypothesis constant_rule(const McreModel& model, std::size_t joint_behavior);
Hypothesis random_rule(const McreModel& model, CounterRng& rng);

/// Every table H^N x B^N -> B^N, in lexicographic table order. Only allowed
/// when |H^N x B^N| <= 8 and |B^N| <= 4.
HypothesisClass enumerate_all_hypotheses(const McreModel& model);

/// Bayes rule, stay rule, every constant rule, then `random_members` random
/// tables, duplicates dropped.
HypothesisClass reference_class(const McreModel& model, std::size_t random_members, std::uint64_t seed);

// JSON: {"name": "...", "table": {"h1,...,hN|b1,...,bN": "b1,...,bN", ...}}
Hypothesis hypothesis_from_json(const nlohmann::json& doc, const McreModel& model);
nlohmann::json hypothesis_to_json(const Hypothesis& f, const McreModel& model);
// JSON: {"hypotheses": [ ... ]}
HypothesisClass class_from_json(const nlohmann::json& doc, const McreModel& model);
nlohmann::json class_to_json(const HypothesisClass& cls, const McreModel& model);

}  // namespace mcre
