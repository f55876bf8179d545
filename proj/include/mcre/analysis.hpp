#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mcre/model.hpp"

namespace mcre {

/// Strongly connected components of the support digraph (edges where M(i,j) > 0),
/// in reverse topological order of the condensation.
std::vector<std::vector<std::size_t>> strongly_connected_components(const Matrix& matrix);

bool is_irreducible(const Matrix& matrix);

/// gcd of return times of an irreducible chain. Throws std::domain_error on
/// reducible input.
std::size_t period(const Matrix& matrix);

/// Exactly one closed communicating class, and that class is aperiodic. This is
/// the condition under which M^n converges to a rank-one limit.
bool is_ergodic(const Matrix& matrix);

// Wielandt's bound Z^2 - 2Z + 2 on the primitivity index.
std::uint64_t wielandt_cap(std::size_t z);

struct N0Delta {
  std::size_t n0 = 0;
  double delta = 0.0;  // min entry of M^(n0)
};

/// Smallest n <= wielandt_cap(Z) with M^(n) entrywise positive, or nullopt when
/// the matrix is not primitive.
std::optional<N0Delta> find_n0_delta(const Matrix& matrix);

struct StationaryDistribution {
  Vector pi;
  double residual = 0.0;  // max |pi M - pi|
  std::size_t iterations = 0;
  bool used_linear_solve = false;
};

struct StationaryOptions {
  double tol = 1e-12;
  std::size_t max_iterations = 1'000'000;
};

/// Power iteration from the uniform distribution, falling back to solving
/// (M^T - I) pi = 0 with sum(pi) = 1. Throws std::domain_error when the chain
/// is not ergodic and std::runtime_error when neither route reaches `tol`.
StationaryDistribution stationary_distribution(const Matrix& matrix, StationaryOptions options = {});
StationaryDistribution stationary_by_linear_solve(const Matrix& matrix);

double stationary_residual(const Matrix& matrix, const Vector& pi);

struct MixingProfile {
  std::vector<double> betas;  // betas[m-1] = beta(m)

  double at(std::size_t m) const { return betas.at(m - 1); }
};

/// beta(m) = sum_x pi(x) * TV(M^m(x,.), pi) for m = 1..m_max.
MixingProfile beta_mixing(const Matrix& matrix, const Vector& pi, std::size_t m_max);

struct ErgodicityReport {
  bool irreducible = false;
  std::optional<std::size_t> period;  // absent for reducible chains
  bool ergodic = false;
  std::optional<std::size_t> n0;
  std::optional<double> delta;
  std::uint64_t wielandt_cap = 0;
};

ErgodicityReport analyze_chain(const Matrix& matrix);

struct KernelFailure {
  std::size_t joint_feedback = 0;
  bool irreducible = false;
  std::optional<std::size_t> period;
};

struct FeedbackGap {
  std::size_t joint_behavior = 0;
  std::size_t joint_feedback = 0;
};

struct AssumptionReport {
  bool a1_ok = false;  // every joint M_k irreducible and aperiodic
  std::vector<KernelFailure> a1_failures;
  bool a2_ok = false;  // every q(k|m) > 0
  std::vector<FeedbackGap> a2_violations;
  // Every per-agent kernel irreducible and aperiodic; implies a1_ok.
  bool per_agent_primitive = false;
};

AssumptionReport check_assumptions(const McreModel& model);

}  // namespace mcre
