#include "mcre/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "mcre/binomial.hpp"
#include "mcre/error.hpp"
#include "mcre/format.hpp"

namespace mcre {

void TailExperimentConfig::validate() const {
  if (replicas < 1) throw ConfigError("tail experiment: replicas must be at least 1");
  if (t_grid.empty() || eps_grid.empty()) throw ConfigError("tail experiment: grids must be non-empty");
  for (auto t : t_grid)
    if (t < 1) throw ConfigError("tail experiment: T values must be positive");
  for (auto e : eps_grid)
    if (!(e > 0.0)) throw ConfigError("tail experiment: eps values must be positive");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("tail experiment: confidence must lie in (0, 1)");
  if (t_grid.size() > 0xFFFFFFFFu || replicas > 0xFFFFFFFFu)
    throw ConfigError("tail experiment: grid or replica count too large");
}

std::size_t worker_threads(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MCRE_LAB_THREADS")) {
      const long cap = std::strtol(env, nullptr, 10);
      if (cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
    }
  }
  return std::max<std::size_t>(1, n);
}

namespace {

// Runs fn(replica) for every replica; each writes only its own slot, so the
// result does not depend on scheduling.
template <class Fn>
void for_each_replica(std::size_t replicas, std::size_t threads, Fn&& fn) {
  threads = std::min(threads, replicas);
  if (threads <= 1) {
    for (std::size_t r = 0; r < replicas; ++r) fn(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      try {
        for (std::size_t r = next++; r < replicas; r = next++) fn(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = replicas;
      }
    });
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// deviation(trajectory) -> number; shared driver for both tail estimators.
template <class Deviation>
TailEstimate run_tail(const Simulator& sim, const TailExperimentConfig& cfg, Deviation&& deviation) {
  cfg.validate();
  if (!sim.has_stationary())
    throw std::domain_error("tail experiment: stationary start needs an ergodic lifted chain");
  TailEstimate est;
  est.t_grid = cfg.t_grid;
  est.eps_grid = cfg.eps_grid;
  const std::size_t threads = worker_threads(cfg.threads);
  for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
    std::vector<double> deviations(cfg.replicas);
    for_each_replica(cfg.replicas, threads, [&](std::size_t r) {
      TrajectoryConfig tc;
      tc.rounds = cfg.t_grid[ti];
      tc.seed = cfg.master_seed;
      tc.stream = stream_id(static_cast<std::uint32_t>(ti), static_cast<std::uint32_t>(r));
      tc.start = StationaryStart{};
      deviations[r] = deviation(sim.sample(tc));
    });
    for (double eps : cfg.eps_grid) {
      TailCell cell;
      cell.rounds = cfg.t_grid[ti];
      cell.eps = eps;
      cell.replicas = cfg.replicas;
      cell.hits = static_cast<std::size_t>(
          std::count_if(deviations.begin(), deviations.end(), [&](double d) { return d >= eps; }));
      cell.freq = static_cast<double>(cell.hits) / static_cast<double>(cell.replicas);
      cell.cp_upper = clopper_pearson(cell.hits, cell.replicas, cfg.confidence).upper;
      est.cells.push_back(cell);
    }
  }
  return est;
}

}  // namespace

TailEstimate estimate_deviation_tail(const Simulator& sim, const Hypothesis& f, const LossFunction& loss,
                                     const TailExperimentConfig& cfg) {
  const double expected = expected_risk(f, sim.chain(), sim.stationary().pi, loss);
  auto est = run_tail(sim, cfg, [&](const Trajectory& traj) {
    return std::abs(empirical_risk(f, traj, loss) - expected);
  });
  est.expected_risks = {expected};
  return est;
}

TailEstimate estimate_deviation_tail(const McreModel& model, const Hypothesis& f, const LossFunction& loss,
                                     const TailExperimentConfig& cfg) {
  return estimate_deviation_tail(Simulator::with_stationary(model), f, loss, cfg);
}

TailEstimate estimate_sup_deviation_tail(const Simulator& sim, const HypothesisClass& cls,
                                         const LossFunction& loss, const TailExperimentConfig& cfg) {
  std::vector<double> expected;
  for (const auto& f : cls.members())
    expected.push_back(expected_risk(f, sim.chain(), sim.stationary().pi, loss));
  auto est = run_tail(sim, cfg, [&](const Trajectory& traj) {
    double worst = 0.0;
    for (std::size_t i = 0; i < cls.size(); ++i)
      worst = std::max(worst, std::abs(empirical_risk(cls[i], traj, loss) - expected[i]));
    return worst;
  });
  est.expected_risks = std::move(expected);
  return est;
}

TailEstimate estimate_sup_deviation_tail(const McreModel& model, const HypothesisClass& cls,
                                         const LossFunction& loss, const TailExperimentConfig& cfg) {
  return estimate_sup_deviation_tail(Simulator::with_stationary(model), cls, loss, cfg);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Vacuous: return "vacuous";
  }
  return "unknown";
}

std::size_t DominanceReport::count(Verdict v) const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [&](const DominanceCell& c) { return c.verdict == v; }));
}

DominanceReport dominance_check(const TailEstimate& est, const std::vector<double>& bounds) {
  if (bounds.size() != est.cells.size() || est.cells.size() != est.t_grid.size() * est.eps_grid.size())
    throw std::invalid_argument("dominance_check: bound grid does not match the estimate grid");
  DominanceReport report;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    DominanceCell cell{est.cells[i], BoundValue::of(bounds[i]), Verdict::Vacuous};
    if (!cell.bound.vacuous) {
      if (cell.tail.cp_upper <= cell.bound.clamped)
        cell.verdict = Verdict::Pass;
      else if (cell.tail.freq > cell.bound.clamped)
        cell.verdict = Verdict::Fail;
      else
        cell.verdict = Verdict::Inconclusive;
    }
    report.cells.push_back(cell);
  }
  return report;
}

double pi_occupancy_check(const Simulator& sim, std::size_t rounds, std::uint64_t seed) {
  if (!sim.has_stationary()) throw std::domain_error("pi_occupancy_check: chain is not ergodic");
  TrajectoryConfig tc;
  tc.rounds = rounds;
  tc.seed = seed;
  tc.start = StationaryStart{};
  const Trajectory traj = sim.sample(tc);
  return total_variation(occupancy(traj, sim.chain()), sim.stationary().pi);
}

double pi_occupancy_check(const McreModel& model, std::size_t rounds, std::uint64_t seed) {
  return pi_occupancy_check(Simulator::with_stationary(model), rounds, seed);
}

std::vector<double> pointwise_bound_grid(const ErgodicityReport& report, std::size_t z, double loss_bound,
                                         const std::vector<std::size_t>& t_grid,
                                         const std::vector<double>& eps_grid) {
  std::vector<double> bounds;
  for (auto t : t_grid)
    for (double eps : eps_grid) {
      if (!report.n0 || !report.delta ||
          !(static_cast<double>(t) > pointwise_threshold(loss_bound, *report.n0, *report.delta, z, eps))) {
        bounds.push_back(std::numeric_limits<double>::infinity());
        continue;
      }
      bounds.push_back(pointwise_bound(loss_bound, *report.n0, *report.delta, z, t, eps));
    }
  return bounds;
}

UniformPlan plan_uniform_bounds(const Simulator& sim, const HypothesisClass& cls, const LossFunction& loss,
                                const TailExperimentConfig& cfg, std::size_t m_max) {
  cfg.validate();
  UniformPlan plan;
  plan.profile = beta_mixing(sim.chain().matrix(), sim.stationary().pi, m_max);
  const double b = loss.bound();
  const double eps_max = *std::max_element(cfg.eps_grid.begin(), cfg.eps_grid.end());
  for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
    TrajectoryConfig tc;
    tc.rounds = cfg.t_grid[ti];
    tc.seed = cfg.master_seed;
    tc.stream = stream_id(0xFFFFFFFFu, static_cast<std::uint32_t>(ti));
    Trajectory reference = sim.sample(tc);
    const auto select_cover = covering_number_on_sample(cls, loss, reference, eps_max / 16.0);
    const BlockScheme scheme = choose_block_size(plan.profile, cfg.t_grid[ti],
                                                 static_cast<double>(select_cover.size), b, eps_max);
    reference.z.resize(scheme.used_rounds);
    plan.schemes.push_back(scheme);
    plan.used_t_grid.push_back(scheme.used_rounds);
    for (double eps : cfg.eps_grid) {
      const auto cover = covering_number_on_sample(cls, loss, reference, eps / 16.0);
      plan.covers.push_back(cover);
      plan.bounds.push_back(uniform_bound(static_cast<double>(cover.size), scheme.tau, b, eps,
                                          plan.profile.at(scheme.block_m)));
    }
  }
  return plan;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_tails_csv(const std::filesystem::path& path, const TailEstimate& est) {
  auto out = open_out(path);
  out << "T,eps,hits,freq,cp_upper\n";
  for (const auto& c : est.cells)
    out << c.rounds << ',' << format_double(c.eps) << ',' << c.hits << ',' << format_double(c.freq) << ','
        << format_double(c.cp_upper) << '\n';
}

void write_dominance_csv(const std::filesystem::path& path, const DominanceReport& report) {
  auto out = open_out(path);
  out << "T,eps,hits,freq,cp_upper,bound,vacuous,verdict\n";
  for (const auto& d : report.cells)
    out << d.tail.rounds << ',' << format_double(d.tail.eps) << ',' << d.tail.hits << ','
        << format_double(d.tail.freq) << ',' << format_double(d.tail.cp_upper) << ','
        << format_double(d.bound.raw) << ',' << (d.bound.vacuous ? "true" : "false") << ','
        << to_string(d.verdict) << '\n';
}

void write_plot_data_csv(const std::filesystem::path& path, const DominanceReport& report) {
  auto out = open_out(path);
  out << "T,eps,empirical_freq,empirical_cp_upper,bound_clamped\n";
  for (const auto& d : report.cells)
    out << d.tail.rounds << ',' << format_double(d.tail.eps) << ',' << format_double(d.tail.freq) << ','
        << format_double(d.tail.cp_upper) << ',' << format_double(d.bound.clamped) << '\n';
}

nlohmann::json dominance_to_json(const DominanceReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& d : report.cells)
    cells.push_back({{"T", d.tail.rounds},
                     {"eps", d.tail.eps},
                     {"hits", d.tail.hits},
                     {"freq", d.tail.freq},
                     {"cp_upper", d.tail.cp_upper},
                     {"bound", d.bound.raw},
                     {"vacuous", d.bound.vacuous},
                     {"verdict", to_string(d.verdict)}});
  return {{"cells", std::move(cells)},
          {"pass", report.count(Verdict::Pass)},
          {"fail", report.count(Verdict::Fail)},
          {"inconclusive", report.count(Verdict::Inconclusive)},
          {"vacuous", report.count(Verdict::Vacuous)},
          {"informative", report.informative()},
          {"ok", report.ok()}};
}

}  // namespace mcre
