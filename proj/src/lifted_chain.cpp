#include "mcre/lifted_chain.hpp"

#include "mcre/error.hpp"

namespace mcre {

LiftedChain::LiftedChain(std::vector<LiftedState> states, Matrix matrix,
                         std::vector<double> kernel_entries, std::size_t joint_feedbacks,
                         std::size_t joint_behaviors)
    : states_(std::move(states)),
      matrix_(std::move(matrix)),
      kernel_entries_(std::move(kernel_entries)),
      joint_feedbacks_(joint_feedbacks),
      joint_behaviors_(joint_behaviors),
      index_of_nominal_(joint_feedbacks * joint_behaviors * joint_behaviors, -1) {
  const auto z = static_cast<Eigen::Index>(states_.size());
  if (matrix_.rows() != z || matrix_.cols() != z || kernel_entries_.size() != states_.size())
    throw ModelError("lifted chain: matrix and state list disagree in size");
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const auto& s = states_[i];
    if (s.h >= joint_feedbacks || s.b >= joint_behaviors || s.b_next >= joint_behaviors)
      throw ModelError("lifted chain: state " + std::to_string(i) + " out of range");
    index_of_nominal_[nominal(s)] = static_cast<std::ptrdiff_t>(i);
  }
}

std::optional<std::size_t> LiftedChain::index_of(const LiftedState& s) const {
  if (s.h >= joint_feedbacks_ || s.b >= joint_behaviors_ || s.b_next >= joint_behaviors_)
    return std::nullopt;
  const auto i = index_of_nominal_[nominal(s)];
  if (i < 0) return std::nullopt;
  return static_cast<std::size_t>(i);
}

LiftedChain build_lifted_chain(const McreModel& model, LiftedChainOptions options) {
  const std::size_t nh = model.joint_feedbacks().size();
  const std::size_t nb = model.joint_behaviors().size();

  std::vector<LiftedState> states;
  std::vector<double> kernel_entries;
  for (std::size_t k = 0; k < nh; ++k)
    for (std::size_t m = 0; m < nb; ++m)
      for (std::size_t n = 0; n < nb; ++n) {
        const double entry = joint_kernel_entry(model.kernels(), model.joint_behaviors(),
                                                model.joint_feedbacks(), k, m, n);
        if (options.prune && entry == 0.0) continue;
        if (states.size() == options.state_cap)
          throw ModelError("lifted chain: state count exceeds cap of " +
                           std::to_string(options.state_cap) + " (nominal " +
                           std::to_string(nh * nb * nb) + ")");
        states.push_back({k, m, n});
        kernel_entries.push_back(entry);
      }
  if (states.empty()) throw ModelError("lifted chain: pruning left no states");

  std::vector<Vector> feedback_given_behavior;
  feedback_given_behavior.reserve(nb);
  for (std::size_t m = 0; m < nb; ++m)
    feedback_given_behavior.push_back(induced_feedback_distribution(model, m));

  // Column (k,m,n) receives q(k|m) M_k(m,n) from every row whose b_next equals m.
  const auto z = static_cast<Eigen::Index>(states.size());
  Matrix matrix = Matrix::Zero(z, z);
  for (Eigen::Index col = 0; col < z; ++col) {
    const auto& to = states[static_cast<std::size_t>(col)];
    const double p = feedback_given_behavior[to.b][static_cast<Eigen::Index>(to.h)] *
                     kernel_entries[static_cast<std::size_t>(col)];
    if (p == 0.0) continue;
    for (Eigen::Index row = 0; row < z; ++row)
      if (states[static_cast<std::size_t>(row)].b_next == to.b) matrix(row, col) = p;
  }
  return LiftedChain(std::move(states), std::move(matrix), std::move(kernel_entries), nh, nb);
}

LiftedChain prune_states(const LiftedChain& chain) {
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (chain.kernel_entry(i) != 0.0) keep.push_back(static_cast<Eigen::Index>(i));
  if (keep.empty()) throw ModelError("prune_states: pruning would empty the state space");

  std::vector<LiftedState> states;
  std::vector<double> entries;
  const auto z = static_cast<Eigen::Index>(keep.size());
  Matrix matrix(z, z);
  for (Eigen::Index r = 0; r < z; ++r) {
    states.push_back(chain.state(static_cast<std::size_t>(keep[r])));
    entries.push_back(chain.kernel_entry(static_cast<std::size_t>(keep[r])));
    for (Eigen::Index c = 0; c < z; ++c) matrix(r, c) = chain.matrix()(keep[r], keep[c]);
  }
  return LiftedChain(std::move(states), std::move(matrix), std::move(entries),
                     chain.joint_feedbacks(), chain.joint_behaviors());
}

}  // namespace mcre
