#include "mcre/model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "mcre/error.hpp"

namespace mcre {
namespace {

template <class Space>
void check_labels(const Space& space, const std::string& what, std::vector<std::string>& out) {
  if (space.size() == 0) out.push_back(what + ": at least one label required");
  std::set<std::string> seen;
  for (const auto& label : space.labels()) {
    if (label.empty()) out.push_back(what + ": empty label");
    if (label.find_first_of("|,") != std::string::npos)
      out.push_back(what + ": label '" + label + "' contains a reserved character ('|' or ',')");
    if (!seen.insert(label).second) out.push_back(what + ": duplicate label '" + label + "'");
  }
}

std::string join_labels(const std::vector<std::size_t>& digits,
                        const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0) out += ',';
    out += labels[digits[i]];
  }
  return out;
}

}  // namespace

FeedbackFunction::FeedbackFunction(std::size_t user_factors, std::size_t joint_behaviors,
                                   std::vector<std::size_t> table)
    : user_factors_(user_factors), joint_behaviors_(joint_behaviors), table_(std::move(table)) {
  if (table_.size() != user_factors_ * joint_behaviors_)
    throw ModelError("feedback_table: expected " + std::to_string(user_factors_ * joint_behaviors_) +
                     " entries, got " + std::to_string(table_.size()));
}

AgentKernelSet::AgentKernelSet(std::vector<std::vector<Matrix>> kernels)
    : kernels_(std::move(kernels)) {
  std::vector<std::string> violations;
  if (kernels_.empty()) violations.push_back("kernels: at least one agent required");
  const std::size_t feedbacks = feedback_count();
  const Eigen::Index behaviors = static_cast<Eigen::Index>(behavior_count());
  for (std::size_t a = 0; a < kernels_.size(); ++a) {
    if (kernels_[a].size() != feedbacks || feedbacks == 0) {
      violations.push_back("kernels: agent " + std::to_string(a) + " has " +
                           std::to_string(kernels_[a].size()) + " feedback kernels, expected " +
                           std::to_string(feedbacks));
      continue;
    }
    for (std::size_t k = 0; k < feedbacks; ++k) {
      const Matrix& m = kernels_[a][k];
      const std::string where = "kernel agent " + std::to_string(a) + " feedback " + std::to_string(k);
      if (m.rows() != behaviors || m.cols() != behaviors || behaviors == 0) {
        violations.push_back(where + ": shape " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected square " +
                             std::to_string(behaviors));
        continue;
      }
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if ((m.row(r).array() < 0.0).any() || !m.row(r).allFinite())
          violations.push_back(where + " row " + std::to_string(r) + ": negative or non-finite entry");
        const double sum = m.row(r).sum();
        if (std::abs(sum - 1.0) > kInputTolerance)
          violations.push_back(where + " row " + std::to_string(r) + ": sums to " +
                               std::to_string(sum) + ", expected 1");
      }
    }
  }
  if (!violations.empty()) throw ModelError(std::move(violations));
}

McreModel::McreModel(BehaviorSpace behaviors, FeedbackSpace feedbacks, UserFactorModel users,
                     FeedbackFunction feedback_fn, AgentKernelSet kernels)
    : behaviors_(std::move(behaviors)),
      feedbacks_(std::move(feedbacks)),
      users_(std::move(users)),
      feedback_fn_(std::move(feedback_fn)),
      kernels_(std::move(kernels)) {
  std::vector<std::string> violations;
  check_labels(behaviors_, "behavior_labels", violations);
  check_labels(feedbacks_, "feedback_labels", violations);
  check_labels(LabelSpace<struct UserTag>(users_.labels), "user_factors.labels", violations);

  if (users_.probs.size() != users_.labels.size()) {
    violations.push_back("user_factors: " + std::to_string(users_.labels.size()) + " labels but " +
                         std::to_string(users_.probs.size()) + " probabilities");
  } else {
    double sum = 0.0;
    for (std::size_t i = 0; i < users_.probs.size(); ++i) {
      if (!(users_.probs[i] >= 0.0) || !std::isfinite(users_.probs[i]))
        violations.push_back("user_factors.probs[" + std::to_string(i) + "] is negative or non-finite");
      sum += users_.probs[i];
    }
    if (std::abs(sum - 1.0) > kInputTolerance)
      violations.push_back("user_factors.probs sum to " + std::to_string(sum) + ", expected 1");
  }

  if (kernels_.behavior_count() != behaviors_.size())
    violations.push_back("kernels: matrices are " + std::to_string(kernels_.behavior_count()) +
                         "x" + std::to_string(kernels_.behavior_count()) + " but there are " +
                         std::to_string(behaviors_.size()) + " behavior labels");
  if (kernels_.feedback_count() != feedbacks_.size())
    violations.push_back("kernels: " + std::to_string(kernels_.feedback_count()) +
                         " kernels per agent but " + std::to_string(feedbacks_.size()) +
                         " feedback labels");

  if (violations.empty()) {
    joint_behaviors_ = JointSpace(behaviors_.size(), agents());
    joint_feedbacks_ = JointSpace(feedbacks_.size(), agents());
    if (feedback_fn_.user_factors() != users_.labels.size() ||
        feedback_fn_.joint_behaviors() != joint_behaviors_.size()) {
      violations.push_back("feedback_table: shape does not match user factors x joint behaviors");
    } else {
      for (std::size_t i = 0; i < feedback_fn_.table().size(); ++i)
        if (feedback_fn_.table()[i] >= joint_feedbacks_.size())
          violations.push_back("feedback_table: entry " + std::to_string(i) + " out of range");
    }
  }
  if (!violations.empty()) throw ModelError(std::move(violations));
}

std::string McreModel::joint_behavior_label(std::size_t joint_behavior) const {
  return join_labels(joint_behaviors_.decode(joint_behavior), behaviors_.labels());
}

std::string McreModel::joint_feedback_label(std::size_t joint_feedback) const {
  return join_labels(joint_feedbacks_.decode(joint_feedback), feedbacks_.labels());
}

Vector induced_feedback_distribution(const McreModel& model, std::size_t joint_behavior) {
  if (joint_behavior >= model.joint_behaviors().size())
    throw std::invalid_argument("induced_feedback_distribution: joint behavior out of range");
  Vector q = Vector::Zero(static_cast<Eigen::Index>(model.joint_feedbacks().size()));
  const auto& probs = model.users().probs;
  for (std::size_t u = 0; u < probs.size(); ++u)
    q[static_cast<Eigen::Index>(model.feedback_fn()(u, joint_behavior))] += probs[u];
  return q;
}

Vector induced_feedback_distribution(const McreModel& model,
                                     std::span<const std::size_t> behavior_per_agent) {
  if (behavior_per_agent.size() != model.agents())
    throw std::invalid_argument("induced_feedback_distribution: expected " +
                                std::to_string(model.agents()) + " behaviors, got " +
                                std::to_string(behavior_per_agent.size()));
  return induced_feedback_distribution(model, model.joint_behaviors().encode(behavior_per_agent));
}

double joint_kernel_entry(const AgentKernelSet& kernels, const JointSpace& behaviors,
                          const JointSpace& feedbacks, std::size_t joint_feedback,
                          std::size_t from, std::size_t to) {
  double p = 1.0;
  for (std::size_t i = 0; i < kernels.agents() && p != 0.0; ++i) {
    const Matrix& k = kernels.kernel(i, feedbacks.digit(joint_feedback, i));
    p *= k(static_cast<Eigen::Index>(behaviors.digit(from, i)),
           static_cast<Eigen::Index>(behaviors.digit(to, i)));
  }
  return p;
}

Matrix joint_behavior_kernel(const AgentKernelSet& kernels, std::size_t joint_feedback) {
  const JointSpace behaviors(kernels.behavior_count(), kernels.agents());
  const JointSpace feedbacks(kernels.feedback_count(), kernels.agents());
  if (joint_feedback >= feedbacks.size())
    throw std::invalid_argument("joint_behavior_kernel: joint feedback out of range");
  const auto n = static_cast<Eigen::Index>(behaviors.size());
  Matrix out(n, n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index to = 0; to < n; ++to)
      out(m, to) = joint_kernel_entry(kernels, behaviors, feedbacks, joint_feedback,
                                      static_cast<std::size_t>(m), static_cast<std::size_t>(to));
  return out;
}

Matrix joint_behavior_kernel(const AgentKernelSet& kernels,
                             std::span<const std::size_t> feedback_per_agent) {
  if (feedback_per_agent.size() != kernels.agents())
    throw std::invalid_argument("joint_behavior_kernel: expected " +
                                std::to_string(kernels.agents()) + " feedback values");
  const JointSpace feedbacks(kernels.feedback_count(), kernels.agents());
  return joint_behavior_kernel(kernels, feedbacks.encode(feedback_per_agent));
}

}  // namespace mcre
