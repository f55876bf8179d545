#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcre/joint_space.hpp"

namespace mcre {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Tolerance on user-supplied probabilities.
inline constexpr double kInputTolerance = 1e-12;
// Tolerance on matrices derived by products and sums of inputs.
inline constexpr double kDerivedTolerance = 1e-9;

/// Ordered list of distinct symbols. Index order is canonical and never sorted.
template <class Tag>
class LabelSpace {
 public:
  LabelSpace() = default;
  explicit LabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {}

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::optional<std::size_t> index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return i;
    return std::nullopt;
  }

 private:
  std::vector<std::string> labels_;
};

using BehaviorSpace = LabelSpace<struct BehaviorTag>;
using FeedbackSpace = LabelSpace<struct FeedbackTag>;

struct UserFactorModel {
  std::vector<std::string> labels;
  std::vector<double> probs;
};

/// Deterministic feedback lookup: (user factor, joint behavior) -> joint feedback.
class FeedbackFunction {
 public:
  FeedbackFunction() = default;
  // `table[u * joint_behaviors + m]` holds the joint feedback index.
  FeedbackFunction(std::size_t user_factors, std::size_t joint_behaviors,
                   std::vector<std::size_t> table);

  std::size_t operator()(std::size_t user, std::size_t joint_behavior) const {
    return table_[user * joint_behaviors_ + joint_behavior];
  }
  std::size_t user_factors() const noexcept { return user_factors_; }
  std::size_t joint_behaviors() const noexcept { return joint_behaviors_; }
  const std::vector<std::size_t>& table() const noexcept { return table_; }

 private:
  std::size_t user_factors_ = 0;
  std::size_t joint_behaviors_ = 0;
  std::vector<std::size_t> table_;
};

/// Per-agent transition kernels, one |B|x|B| matrix per per-agent feedback value.
class AgentKernelSet {
 public:
  AgentKernelSet() = default;
  // kernels[agent][feedback]
  explicit AgentKernelSet(std::vector<std::vector<Matrix>> kernels);

  std::size_t agents() const noexcept { return kernels_.size(); }
  std::size_t feedback_count() const noexcept { return kernels_.empty() ? 0 : kernels_[0].size(); }
  std::size_t behavior_count() const noexcept {
    return feedback_count() == 0 ? 0 : static_cast<std::size_t>(kernels_[0][0].rows());
  }
  const Matrix& kernel(std::size_t agent, std::size_t feedback) const {
    return kernels_.at(agent).at(feedback);
  }

 private:
  std::vector<std::vector<Matrix>> kernels_;
};

/// The full generative specification of agents interacting through feedback.
/// Immutable after construction; construction validates every invariant and
/// throws ModelError listing all violations.
class McreModel {
 public:
  McreModel(BehaviorSpace behaviors, FeedbackSpace feedbacks, UserFactorModel users,
            FeedbackFunction feedback_fn, AgentKernelSet kernels);

  std::size_t agents() const noexcept { return kernels_.agents(); }
  const BehaviorSpace& behaviors() const noexcept { return behaviors_; }
  const FeedbackSpace& feedbacks() const noexcept { return feedbacks_; }
  const UserFactorModel& users() const noexcept { return users_; }
  const FeedbackFunction& feedback_fn() const noexcept { return feedback_fn_; }
  const AgentKernelSet& kernels() const noexcept { return kernels_; }

  // Index spaces for B^N and H^N.
  const JointSpace& joint_behaviors() const noexcept { return joint_behaviors_; }
  const JointSpace& joint_feedbacks() const noexcept { return joint_feedbacks_; }

  // Per-agent projection of the feedback function.
  std::size_t agent_feedback(std::size_t user, std::size_t joint_behavior, std::size_t agent) const {
    return joint_feedbacks_.digit(feedback_fn_(user, joint_behavior), agent);
  }

  std::string joint_behavior_label(std::size_t joint_behavior) const;
  std::string joint_feedback_label(std::size_t joint_feedback) const;

 private:
  BehaviorSpace behaviors_;
  FeedbackSpace feedbacks_;
  UserFactorModel users_;
  FeedbackFunction feedback_fn_;
  AgentKernelSet kernels_;
  JointSpace joint_behaviors_;
  JointSpace joint_feedbacks_;
};

/// q(k|m): user probability mass mapped to each joint feedback k by the
/// feedback function at joint behavior m. Length |H|^N.
Vector induced_feedback_distribution(const McreModel& model, std::size_t joint_behavior);
Vector induced_feedback_distribution(const McreModel& model,
                                     std::span<const std::size_t> behavior_per_agent);

/// M_k(m,n) = prod_i M^i_{k_i}(m_i, n_i) over the joint behavior space.
Matrix joint_behavior_kernel(const AgentKernelSet& kernels, std::size_t joint_feedback);
Matrix joint_behavior_kernel(const AgentKernelSet& kernels,
                             std::span<const std::size_t> feedback_per_agent);

// Single entry of the joint kernel without materializing it.
double joint_kernel_entry(const AgentKernelSet& kernels, const JointSpace& behaviors,
                          const JointSpace& feedbacks, std::size_t joint_feedback,
                          std::size_t from, std::size_t to);

}  // namespace mcre
