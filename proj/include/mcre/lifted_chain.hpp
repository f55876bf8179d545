#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mcre/model.hpp"

namespace mcre {

inline constexpr std::size_t kDefaultStateCap = 20000;

/// z_t = (h_t, b_t, b_{t+1}) as joint indices into H^N, B^N, B^N.
struct LiftedState {
  std::size_t h = 0;
  std::size_t b = 0;
  std::size_t b_next = 0;

  friend bool operator==(const LiftedState&, const LiftedState&) = default;
};

/// Time-homogeneous chain over lifted states. States are enumerated in
/// lexicographic (h, b, b_next) order; pruning keeps the relative order.
class LiftedChain {
 public:
  LiftedChain(std::vector<LiftedState> states, Matrix matrix, std::vector<double> kernel_entries,
              std::size_t joint_feedbacks, std::size_t joint_behaviors);

  std::size_t size() const noexcept { return states_.size(); }
  const std::vector<LiftedState>& states() const noexcept { return states_; }
  const LiftedState& state(std::size_t i) const { return states_.at(i); }
  const Matrix& matrix() const noexcept { return matrix_; }

  // M_k(m, n) of the joint kernel for each state (k, m, n).
  double kernel_entry(std::size_t i) const { return kernel_entries_.at(i); }

  std::optional<std::size_t> index_of(const LiftedState& s) const;
  std::size_t nominal_size() const noexcept { return index_of_nominal_.size(); }
  std::size_t joint_feedbacks() const noexcept { return joint_feedbacks_; }
  std::size_t joint_behaviors() const noexcept { return joint_behaviors_; }

 private:
  std::size_t nominal(const LiftedState& s) const {
    return (s.h * joint_behaviors_ + s.b) * joint_behaviors_ + s.b_next;
  }

  std::vector<LiftedState> states_;
  Matrix matrix_;
  std::vector<double> kernel_entries_;
  std::size_t joint_feedbacks_;
  std::size_t joint_behaviors_;
  std::vector<std::ptrdiff_t> index_of_nominal_;
};

struct LiftedChainOptions {
  bool prune = false;
  std::size_t state_cap = kDefaultStateCap;
};

/// Entry (j,p,q) -> (k,m,n) is 0 when m != q and q(k|m) * M_k(m,n) otherwise.
/// Throws ModelError when the state count exceeds the cap.
LiftedChain build_lifted_chain(const McreModel& model, LiftedChainOptions options = {});

/// Drops states (k,m,n) with M_k(m,n) = 0. No renormalization: such states never
/// receive probability, so rows stay stochastic.
LiftedChain prune_states(const LiftedChain& chain);

}  // namespace mcre
