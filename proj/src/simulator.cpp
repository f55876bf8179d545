#include "mcre/simulator.hpp"

#include <stdexcept>

#include "mcre/rng.hpp"

namespace mcre {

Simulator::Simulator(McreModel model) : model_(std::move(model)) {
  const auto& ks = model_.kernels();
  rows_.resize(ks.agents());
  for (std::size_t a = 0; a < ks.agents(); ++a) {
    rows_[a].resize(ks.feedback_count());
    for (std::size_t k = 0; k < ks.feedback_count(); ++k) {
      const Matrix& m = ks.kernel(a, k);
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        rows_[a][k].push_back(std::move(row));
      }
    }
  }
}

Simulator::Simulator(McreModel model, LiftedChain chain, StationaryDistribution pi)
    : Simulator(std::move(model)) {
  if (pi.pi.size() != static_cast<Eigen::Index>(chain.size()))
    throw std::invalid_argument("Simulator: stationary distribution does not match the chain");
  chain_.emplace(std::move(chain));
  pi_.emplace(std::move(pi));
}

Simulator Simulator::with_stationary(McreModel model, LiftedChainOptions options) {
  LiftedChain chain = build_lifted_chain(model, options);
  StationaryDistribution pi = stationary_distribution(chain.matrix());
  return Simulator(std::move(model), std::move(chain), std::move(pi));
}

const LiftedChain& Simulator::chain() const {
  if (!chain_) throw std::logic_error("Simulator: no lifted chain (construct with_stationary)");
  return *chain_;
}

const StationaryDistribution& Simulator::stationary() const {
  if (!pi_) throw std::logic_error("Simulator: no stationary distribution");
  return *pi_;
}

std::size_t Simulator::step(std::size_t behavior, std::size_t user, CounterRng& rng) const {
  const std::size_t h = model_.feedback_fn()(user, behavior);
  const auto& jb = model_.joint_behaviors();
  const auto& jh = model_.joint_feedbacks();
  std::size_t next = 0;
  for (std::size_t a = 0; a < model_.agents(); ++a) {
    const auto& row = rows_[a][jh.digit(h, a)][jb.digit(behavior, a)];
    next = next * jb.base() + rng.discrete(row);
  }
  return next;
}

Trajectory Simulator::sample(const TrajectoryConfig& cfg) const {
  if (cfg.rounds < 1) throw std::invalid_argument("sample: rounds must be at least 1");
  CounterRng rng(cfg.seed, cfg.stream);
  const auto& probs = model_.users().probs;
  Trajectory traj;
  traj.z.reserve(cfg.rounds);
  if (cfg.record_users) traj.users.reserve(cfg.rounds);

  std::size_t behavior = 0;
  std::size_t remaining = cfg.rounds;
  if (std::holds_alternative<StationaryStart>(cfg.start)) {
    if (!chain_) throw std::domain_error("sample: stationary start needs an ergodic lifted chain");
    const auto& pi = pi_->pi;
    const LiftedState z1 =
        chain_->state(rng.discrete(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size()))));
    traj.z.push_back(z1);
    if (cfg.record_users) {
      // u_1 drawn from the users consistent with the sampled feedback.
      std::vector<double> w(probs.size(), 0.0);
      for (std::size_t u = 0; u < probs.size(); ++u)
        if (model_.feedback_fn()(u, z1.b) == z1.h) w[u] = probs[u];
      traj.users.push_back(rng.discrete(w));
    }
    behavior = z1.b_next;
    --remaining;
  } else {
    const auto& fixed = std::get<FixedStart>(cfg.start);
    if (fixed.joint_behavior >= model_.joint_behaviors().size())
      throw std::invalid_argument("sample: fixed start behavior out of range");
    behavior = fixed.joint_behavior;
    for (std::size_t t = 0; t < fixed.burn_in; ++t) behavior = step(behavior, rng.discrete(probs), rng);
  }

  for (; remaining > 0; --remaining) {
    const std::size_t user = rng.discrete(probs);
    const std::size_t h = model_.feedback_fn()(user, behavior);
    const std::size_t next = step(behavior, user, rng);
    traj.z.push_back({h, behavior, next});
    if (cfg.record_users) traj.users.push_back(user);
    behavior = next;
  }
  return traj;
}

Trajectory sample_trajectory(const McreModel& model, const TrajectoryConfig& cfg) {
  if (std::holds_alternative<StationaryStart>(cfg.start))
    return Simulator::with_stationary(model).sample(cfg);
  return Simulator(model).sample(cfg);
}

LiftedState sample_stationary_start(const LiftedChain& chain, const Vector& pi, std::uint64_t seed) {
  if (pi.size() != static_cast<Eigen::Index>(chain.size()))
    throw std::invalid_argument("sample_stationary_start: pi has wrong length");
  CounterRng rng(seed, 0);
  return chain.state(rng.discrete(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size()))));
}

namespace {

std::size_t require_index(const LiftedChain& chain, const LiftedState& s) {
  const auto i = chain.index_of(s);
  if (!i) throw std::invalid_argument("trajectory visits a state missing from the chain");
  return *i;
}

}  // namespace

TransitionEstimate empirical_transition_matrix(const Trajectory& traj, const LiftedChain& chain) {
  if (traj.size() < 2) throw std::invalid_argument("empirical_transition_matrix: need at least 2 states");
  const auto z = static_cast<Eigen::Index>(chain.size());
  TransitionEstimate out{Matrix::Zero(z, z), std::vector<std::size_t>(chain.size(), 0), {}};
  std::size_t prev = require_index(chain, traj.z.front());
  for (std::size_t t = 1; t < traj.size(); ++t) {
    const std::size_t cur = require_index(chain, traj.z[t]);
    out.estimate(static_cast<Eigen::Index>(prev), static_cast<Eigen::Index>(cur)) += 1.0;
    ++out.visits[prev];
    prev = cur;
  }
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (out.visits[i] == 0) {
      out.unvisited.push_back(i);
      continue;
    }
    out.estimate.row(static_cast<Eigen::Index>(i)) /= static_cast<double>(out.visits[i]);
  }
  return out;
}

Vector occupancy(const Trajectory& traj, const LiftedChain& chain) {
  Vector freq = Vector::Zero(static_cast<Eigen::Index>(chain.size()));
  for (const auto& s : traj.z) freq[static_cast<Eigen::Index>(require_index(chain, s))] += 1.0;
  if (!traj.z.empty()) freq /= static_cast<double>(traj.size());
  return freq;
}

double total_variation(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: length mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace mcre
