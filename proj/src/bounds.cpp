#include "mcre/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mcre/error.hpp"

namespace mcre {

DoeblinParams doeblin_from_chain(const ErgodicityReport& report, std::size_t z) {
  if (!report.n0 || !report.delta)
    throw PreconditionError("Doeblin condition: chain is not primitive (no N0 within the Wielandt bound)");
  DoeblinParams p{*report.n0, static_cast<double>(z) * *report.delta};
  if (p.lambda > 1.0 + kDerivedTolerance)
    throw std::logic_error("Doeblin condition: lambda = Z * delta exceeds 1");
  p.lambda = std::min(p.lambda, 1.0);
  return p;
}

bool minorization_holds(const Matrix& matrix, const DoeblinParams& params) {
  Matrix power = Matrix::Identity(matrix.rows(), matrix.cols());
  for (std::size_t i = 0; i < params.m; ++i) power = power * matrix;
  const double floor = params.lambda / static_cast<double>(matrix.rows());
  // delta is itself a computed min entry; allow its own rounding.
  return (power.array() >= floor * (1.0 - 1e-12)).all();
}

BoundValue BoundValue::of(double raw) {
  return BoundValue{raw, std::min(raw, 1.0), raw >= 1.0};
}

double pointwise_threshold(double loss_bound, std::size_t n0, double delta, std::size_t z, double eps) {
  return 2.0 * loss_bound * static_cast<double>(n0) / (static_cast<double>(z) * delta * eps);
}

double pointwise_bound(double loss_bound, std::size_t n0, double delta, std::size_t z,
                       std::size_t rounds, double eps) {
  if (!(loss_bound > 0) || n0 == 0 || !(delta > 0) || z == 0 || !(eps > 0))
    throw std::invalid_argument("pointwise_bound: need B > 0, N0 >= 1, delta > 0, Z >= 1, eps > 0");
  const double threshold = pointwise_threshold(loss_bound, n0, delta, z, eps);
  const double t = static_cast<double>(rounds);
  if (!(t > threshold)) {
    std::ostringstream os;
    os.precision(17);
    os << "pointwise bound requires T > 2BN0/(Z delta eps) = " << threshold
       << "; minimum admissible T is " << static_cast<std::size_t>(std::floor(threshold)) + 1;
    throw PreconditionError(os.str());
  }
  const double zd = static_cast<double>(z) * delta;
  const double n = static_cast<double>(n0);
  const double gap = t * eps - 2.0 * loss_bound * n / zd;
  return 2.0 * std::exp(-zd * zd * gap * gap / (2.0 * t * loss_bound * loss_bound * n * n));
}

double uniform_bound(double cover, std::size_t tau, double loss_bound, double eps, double beta_at_m) {
  if (!(cover >= 1.0) || tau < 1 || !(loss_bound > 0) || !(eps > 0) || !(beta_at_m >= 0.0) ||
      beta_at_m > 1.0)
    throw std::invalid_argument("uniform_bound: need cover >= 1, tau >= 1, B > 0, eps > 0, beta in [0,1]");
  const double t = static_cast<double>(tau);
  return 16.0 * cover * std::exp(-eps * eps * t / (128.0 * loss_bound * loss_bound)) +
         2.0 * t * beta_at_m;
}

BlockScheme make_block_scheme(std::size_t rounds, std::size_t block_m) {
  if (block_m == 0) throw std::invalid_argument("make_block_scheme: block length must be positive");
  const std::size_t tau = rounds / (2 * block_m);
  if (tau == 0)
    throw PreconditionError("block scheme: T = " + std::to_string(rounds) +
                            " is smaller than 2m = " + std::to_string(2 * block_m));
  const std::size_t used = 2 * tau * block_m;
  return BlockScheme{tau, block_m, used, rounds - used};
}

BlockScheme choose_block_size(const MixingProfile& profile, std::size_t rounds, double cover,
                              double loss_bound, double eps) {
  const std::size_t limit = std::min(profile.betas.size(), rounds / 2);
  if (limit == 0) throw PreconditionError("choose_block_size: T too small or empty mixing profile");
  BlockScheme best = make_block_scheme(rounds, 1);
  double best_value = uniform_bound(cover, best.tau, loss_bound, eps, profile.at(1));
  for (std::size_t m = 2; m <= limit; ++m) {
    const auto scheme = make_block_scheme(rounds, m);
    const double v = uniform_bound(cover, scheme.tau, loss_bound, eps, profile.at(m));
    if (v < best_value) {
      best_value = v;
      best = scheme;
    }
  }
  return best;
}

void MixingParams::validate() const {
  if (!(beta0 >= 0) || !(gamma >= 0) || !(s > 0) || !(s < gamma) || !(c > 0))
    throw std::invalid_argument("MixingParams: need beta0 >= 0, gamma >= 0, 0 < s < gamma, C > 0");
}

double CorollaryScheme::mixing_term() const {
  const double t = static_cast<double>(rounds);
  return mix.beta0 * std::pow(mix.c, -(mix.gamma + 1.0)) * std::pow(t, (mix.s - mix.gamma) / (1.0 + mix.s));
}

double CorollaryScheme::bound(double cover, double loss_bound, double eps) const {
  const double t = static_cast<double>(rounds);
  return 16.0 * cover *
             std::exp(-eps * eps * std::pow(t, mix.s / (1.0 + mix.s)) /
                      (256.0 * loss_bound * loss_bound * mix.c)) +
         mixing_term();
}

CorollaryScheme optimal_block_size(const MixingParams& mix, std::size_t rounds) {
  mix.validate();
  if (rounds < 2) throw std::invalid_argument("optimal_block_size: T must be at least 2");
  const double m = std::round(mix.c * std::pow(static_cast<double>(rounds), 1.0 / (1.0 + mix.s)));
  const auto block_m = static_cast<std::size_t>(std::max(1.0, m));
  return CorollaryScheme{mix, rounds, make_block_scheme(rounds, block_m)};
}

AlgebraicEnvelope fit_algebraic_envelope(const MixingProfile& profile) {
  std::vector<double> xs, ys;
  for (std::size_t m = 1; m <= profile.betas.size(); ++m)
    if (profile.at(m) > 0.0) {
      xs.push_back(std::log(static_cast<double>(m)));
      ys.push_back(std::log(profile.at(m)));
    }
  if (xs.size() < 2)
    throw std::invalid_argument("fit_algebraic_envelope: need at least two positive beta values");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  // Positive entries at a single lag cannot happen here (xs are distinct logs).
  const double slope = sxy / sxx;
  AlgebraicEnvelope env;
  env.gamma = std::max(0.0, -slope);
  env.fitted_beta0 = std::exp(my - slope * mx);
  if (slope > 0.0) env.fitted_beta0 = std::exp(my);  // gamma clamped to 0: fit a level
  env.beta0 = env.fitted_beta0;
  for (std::size_t m = 1; m <= profile.betas.size(); ++m)
    env.beta0 = std::max(env.beta0, profile.at(m) * std::pow(static_cast<double>(m), env.gamma));
  // Absorb the rounding of pow when the envelope is evaluated back at each lag.
  env.beta0 *= 1.0 + 1e-12;
  return env;
}

}  // namespace mcre
