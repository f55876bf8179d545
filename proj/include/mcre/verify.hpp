#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcre/bounds.hpp"
#include "mcre/learner.hpp"
#include "mcre/simulator.hpp"

namespace mcre {

struct TailExperimentConfig {
  std::size_t replicas = 2000;
  std::vector<std::size_t> t_grid{100, 1000, 10000};
  std::vector<double> eps_grid{0.05, 0.1, 0.2, 0.3};
  std::uint64_t master_seed = 0;
  double confidence = 0.99;
  std::size_t threads = 0;  // 0: MCRE_LAB_THREADS or hardware concurrency

  void validate() const;  // throws ConfigError
};

struct TailCell {
  std::size_t rounds = 0;
  double eps = 0.0;
  std::size_t hits = 0;
  std::size_t replicas = 0;
  double freq = 0.0;
  double cp_upper = 1.0;
};

/// Cells in row-major (T, eps) grid order.
struct TailEstimate {
  std::vector<std::size_t> t_grid;
  std::vector<double> eps_grid;
  std::vector<TailCell> cells;
  std::vector<double> expected_risks;  // err_pi per member

  const TailCell& at(std::size_t ti, std::size_t ei) const { return cells.at(ti * eps_grid.size() + ei); }
};

/// Replica r at grid row ti runs a stationary-start trajectory on stream
/// (ti, r) of the master seed and records |err_S^T(f) - err_pi(f)|.
TailEstimate estimate_deviation_tail(const Simulator& sim, const Hypothesis& f, const LossFunction& loss,
                                     const TailExperimentConfig& cfg);
TailEstimate estimate_deviation_tail(const McreModel& model, const Hypothesis& f, const LossFunction& loss,
                                     const TailExperimentConfig& cfg);

/// As above with the per-replica maximum deviation over the class.
TailEstimate estimate_sup_deviation_tail(const Simulator& sim, const HypothesisClass& cls,
                                         const LossFunction& loss, const TailExperimentConfig& cfg);
TailEstimate estimate_sup_deviation_tail(const McreModel& model, const HypothesisClass& cls,
                                         const LossFunction& loss, const TailExperimentConfig& cfg);

enum class Verdict { Pass, Fail, Inconclusive, Vacuous };

std::string to_string(Verdict v);

struct DominanceCell {
  TailCell tail;
  BoundValue bound;
  Verdict verdict = Verdict::Vacuous;
};

struct DominanceReport {
  std::vector<DominanceCell> cells;

  std::size_t count(Verdict v) const;
  std::size_t informative() const { return cells.size() - count(Verdict::Vacuous); }
  bool ok() const { return count(Verdict::Fail) == 0; }
};

/// Per cell: bound >= 1 is vacuous; CP upper limit <= bound passes; frequency
/// strictly above the bound fails; anything else is inconclusive (the bound is
/// below what R replicas can resolve). `bounds` holds raw values in cell order.
DominanceReport dominance_check(const TailEstimate& est, const std::vector<double>& bounds);

/// TV between lifted-state occupancy of a stationary-start run of T rounds and pi.
double pi_occupancy_check(const Simulator& sim, std::size_t rounds, std::uint64_t seed);
double pi_occupancy_check(const McreModel& model, std::size_t rounds, std::uint64_t seed);

std::size_t worker_threads(std::size_t requested);

/// Pointwise bound per (T, eps) cell from the chain's (N0, delta). Cells where
/// T does not exceed the applicability threshold, or where the chain has no
/// N0, carry +inf (reported as vacuous: the bound makes no claim there).
std::vector<double> pointwise_bound_grid(const ErgodicityReport& report, std::size_t z, double loss_bound,
                                         const std::vector<std::size_t>& t_grid,
                                         const std::vector<double>& eps_grid);

struct UniformPlan {
  MixingProfile profile;
  std::vector<BlockScheme> schemes;      // per T row
  std::vector<std::size_t> used_t_grid;  // 2 tau m per row
  std::vector<CoverResult> covers;       // per cell, radius eps/16
  std::vector<double> bounds;            // per cell, raw
};

/// Uniform-bound inputs for each cell. beta(m) comes from the exact mixing
/// profile up to m_max; the block length of each row minimizes the bound at
/// the largest eps; covers are evaluated at radius eps/16 on a reference
/// stationary trajectory (stream group 0xFFFFFFFF) truncated to 2 tau m.
UniformPlan plan_uniform_bounds(const Simulator& sim, const HypothesisClass& cls, const LossFunction& loss,
                                const TailExperimentConfig& cfg, std::size_t m_max);

void write_tails_csv(const std::filesystem::path& path, const TailEstimate& est);
void write_dominance_csv(const std::filesystem::path& path, const DominanceReport& report);
// Bound vs empirical per T, one row per (T, eps).
void write_plot_data_csv(const std::filesystem::path& path, const DominanceReport& report);
nlohmann::json dominance_to_json(const DominanceReport& report);

}  // namespace mcre
