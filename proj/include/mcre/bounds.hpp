#pragma once

#include <cstddef>

#include "mcre/analysis.hpp"

namespace mcre {

/// Minorization M^(m)(x, .) >= lambda * uniform(.), with m = N0 and lambda = Z * delta.
struct DoeblinParams {
  std::size_t m = 1;
  double lambda = 1.0;
};

// Throws PreconditionError when the report has no N0 (chain not primitive).
DoeblinParams doeblin_from_chain(const ErgodicityReport& report, std::size_t z);

// Entrywise check of M^(m)(x, y) >= lambda / Z.
bool minorization_holds(const Matrix& matrix, const DoeblinParams& params);

struct BoundValue {
  double raw = 0.0;
  double clamped = 0.0;  // min(raw, 1)
  bool vacuous = false;  // raw >= 1

  static BoundValue of(double raw);
};

// 2 B N0 / (Z delta eps): the bound applies only for T strictly above this.
double pointwise_threshold(double loss_bound, std::size_t n0, double delta, std::size_t z, double eps);

/// Tail bound for a single predictor:
///   2 exp(-Z^2 delta^2 (T eps - 2 B N0 / (Z delta))^2 / (2 T B^2 N0^2)).
/// Throws PreconditionError naming the minimum admissible T when T is not
/// strictly above pointwise_threshold.
double pointwise_bound(double loss_bound, std::size_t n0, double delta, std::size_t z,
                       std::size_t rounds, double eps);

/// Uniform tail bound over a class:
///   16 cover exp(-eps^2 tau / (128 B^2)) + 2 tau beta(m).
/// `cover` must already be evaluated at radius eps / 16.
double uniform_bound(double cover, std::size_t tau, double loss_bound, double eps, double beta_at_m);

/// 2 tau m = used_rounds <= T; the trailing `discarded` rounds are dropped.
struct BlockScheme {
  std::size_t tau = 0;
  std::size_t block_m = 0;
  std::size_t used_rounds = 0;
  std::size_t discarded = 0;
};

// Throws PreconditionError when T < 2 * block_m.
BlockScheme make_block_scheme(std::size_t rounds, std::size_t block_m);

/// Block length minimizing uniform_bound over m = 1..min(|profile|, T/2).
BlockScheme choose_block_size(const MixingProfile& profile, std::size_t rounds, double cover,
                              double loss_bound, double eps);

/// Algebraic mixing envelope beta(m) <= beta0 m^-gamma, with m = C T^(1/(1+s)).
struct MixingParams {
  double beta0 = 0.0;
  double gamma = 0.0;
  double s = 0.0;  // 0 < s < gamma
  double c = 1.0;

  void validate() const;  // throws std::invalid_argument
};

struct CorollaryScheme {
  MixingParams mix;
  std::size_t rounds = 0;
  BlockScheme scheme;

  /// 16 cover exp(-eps^2 T^(s/(1+s)) / (256 B^2 C)) + beta0 C^-(gamma+1) T^((s-gamma)/(1+s)).
  double bound(double cover, double loss_bound, double eps) const;
  double mixing_term() const;
};

// Throws PreconditionError when tau = 0.
CorollaryScheme optimal_block_size(const MixingParams& mix, std::size_t rounds);

struct AlgebraicEnvelope {
  double beta0 = 0.0;
  double gamma = 0.0;
  double fitted_beta0 = 0.0;  // before inflation
};

/// Least squares of log beta(m) on log m over the positive entries, then beta0
/// raised just enough that beta(m) <= beta0 m^-gamma at every lag. Throws
/// std::invalid_argument with fewer than two positive entries.
AlgebraicEnvelope fit_algebraic_envelope(const MixingProfile& profile);

}  // namespace mcre
