#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mcre/analysis.hpp"
#include "mcre/lifted_chain.hpp"
#include "mcre/model.hpp"
#include "mcre/rng.hpp"

namespace mcre {

inline constexpr std::size_t kDefaultBurnIn = 1000;

struct StationaryStart {};

struct FixedStart {
  std::size_t joint_behavior = 0;
  std::size_t burn_in = kDefaultBurnIn;
};

struct TrajectoryConfig {
  std::size_t rounds = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::variant<StationaryStart, FixedStart> start = StationaryStart{};
  bool record_users = false;
};

/// z_1..z_T with z_t.b_next == z_{t+1}.b. `users` is filled only on request.
struct Trajectory {
  std::vector<LiftedState> z;
  std::vector<std::size_t> users;

  std::size_t size() const noexcept { return z.size(); }
};

/// Samples trajectories of one model. Holds its own copy of the model and,
/// when stationary starts are enabled, the lifted chain and its stationary
/// distribution. Const methods are safe to call concurrently.
class Simulator {
 public:
  explicit Simulator(McreModel model);
  Simulator(McreModel model, LiftedChain chain, StationaryDistribution pi);

  // Builds the lifted chain and pi. Throws std::domain_error when the chain is
  // not ergodic.
  static Simulator with_stationary(McreModel model, LiftedChainOptions options = {});

  Trajectory sample(const TrajectoryConfig& cfg) const;

  const McreModel& model() const noexcept { return model_; }
  bool has_stationary() const noexcept { return chain_.has_value(); }
  const LiftedChain& chain() const;
  const StationaryDistribution& stationary() const;

 private:
  std::size_t step(std::size_t behavior, std::size_t user, CounterRng& rng) const;

  McreModel model_;
  std::optional<LiftedChain> chain_;
  std::optional<StationaryDistribution> pi_;
  // rows_[agent][feedback][behavior] = next-behavior distribution
  std::vector<std::vector<std::vector<std::vector<double>>>> rows_;
};

/// Each round: u ~ users, h = eta(u, b), each agent moves independently by
/// M^i_{h_i}(b_i, .). Throws std::domain_error for a stationary start on a
/// non-ergodic chain.
Trajectory sample_trajectory(const McreModel& model, const TrajectoryConfig& cfg);

LiftedState sample_stationary_start(const LiftedChain& chain, const Vector& pi, std::uint64_t seed);

struct TransitionEstimate {
  Matrix estimate;                  // row-normalized counts
  std::vector<std::size_t> visits;  // outgoing transitions observed per state
  std::vector<std::size_t> unvisited;
};

TransitionEstimate empirical_transition_matrix(const Trajectory& traj, const LiftedChain& chain);

// Empirical occupancy of the lifted states over the trajectory.
Vector occupancy(const Trajectory& traj, const LiftedChain& chain);

double total_variation(const Vector& p, const Vector& q);

}  // namespace mcre
