#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mcre/analysis.hpp"
#include "mcre/binomial.hpp"
#include "mcre/bounds.hpp"
#include "mcre/error.hpp"
#include "mcre/model_io.hpp"
#include "mcre/verify.hpp"
#include "test_models.hpp"

using namespace mcre;
using mcre::testing::fixture;

namespace {

// P(X <= k) for X ~ Bin(n, p), summed in log space.
double binom_cdf(std::size_t k, std::size_t n, double p) {
  double sum = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                            i * std::log(p) + (n - i) * std::log1p(-p);
    sum += std::exp(log_term);
  }
  return sum;
}

// Upper Clopper-Pearson limit: the p with P(X <= k; p) = alpha / 2.
double oracle_cp_upper(std::size_t k, std::size_t n, double confidence) {
  if (k == n) return 1.0;
  const double target = (1.0 - confidence) / 2.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (binom_cdf(k, n, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TailExperimentConfig small_config(std::size_t replicas = 200) {
  TailExperimentConfig cfg;
  cfg.replicas = replicas;
  cfg.t_grid = {50, 400};
  cfg.eps_grid = {0.05, 0.1, 0.2};
  cfg.master_seed = 2718;
  cfg.threads = 1;
  return cfg;
}

std::string first_line(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("clopper-pearson") {
  const auto zero = clopper_pearson(0, 2000, 0.99);
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper == doctest::Approx(2.65e-3).epsilon(0.01));
  CHECK(zero.upper == doctest::Approx(1.0 - std::pow(0.005, 1.0 / 2000)).epsilon(1e-10));
  for (const auto& [k, n] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 10}, {7, 50}, {40, 2000}, {3, 3}}) {
    const auto ci = clopper_pearson(k, n, 0.99);
    CHECK(ci.upper == doctest::Approx(oracle_cp_upper(k, n, 0.99)).epsilon(1e-8));
    CHECK(ci.lower <= double(k) / n);
    CHECK(ci.upper >= double(k) / n);
  }
  CHECK(clopper_pearson(3, 3, 0.99).upper == 1.0);
}

TEST_CASE("config validation") {
  TailExperimentConfig cfg = small_config();
  cfg.replicas = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.eps_grid = {};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.t_grid = {0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("deviation tails") {
  const McreModel model = load_model(fixture("single_agent.json"));
  const Simulator sim = Simulator::with_stationary(model);
  const LossFunction loss(LossKind::ZeroOneJoint, model.joint_behaviors());
  const Hypothesis f = bayes_rule(model);

  SUBCASE("eps above B never hits") {
    TailExperimentConfig cfg = small_config(50);
    cfg.eps_grid = {1.01, 2.0};
    const auto est = estimate_deviation_tail(sim, f, loss, cfg);
    for (const auto& c : est.cells) CHECK(c.hits == 0);
  }
  SUBCASE("frequency never rises with eps, and cp_upper sits above it") {
    const auto est = estimate_deviation_tail(sim, f, loss, small_config());
    for (std::size_t ti = 0; ti < est.t_grid.size(); ++ti)
      for (std::size_t ei = 0; ei < est.eps_grid.size(); ++ei) {
        const auto& c = est.at(ti, ei);
        CHECK(c.freq <= c.cp_upper);
        CHECK(c.cp_upper <= 1.0);
        if (ei > 0) CHECK(c.hits <= est.at(ti, ei - 1).hits);
      }
  }
  SUBCASE("results do not depend on the thread count") {
    TailExperimentConfig one = small_config(120);
    TailExperimentConfig four = one;
    four.threads = 4;
    const auto a = estimate_deviation_tail(sim, f, loss, one);
    const auto b = estimate_deviation_tail(sim, f, loss, four);
    for (std::size_t i = 0; i < a.cells.size(); ++i) CHECK(a.cells[i].hits == b.cells[i].hits);
  }
  SUBCASE("replica r depends only on the master seed and r") {
    // The first 60 replicas of a 120-replica run are a 60-replica run.
    const auto a = estimate_deviation_tail(sim, f, loss, small_config(60));
    TailExperimentConfig more = small_config(120);
    const auto b = estimate_deviation_tail(sim, f, loss, more);
    for (std::size_t i = 0; i < a.cells.size(); ++i) CHECK(a.cells[i].hits <= b.cells[i].hits);
  }
  SUBCASE("deterministic chain with an exact predictor") {
    Matrix sink(2, 2);
    sink << 1, 0, 1, 0;
    const McreModel det = testing::chain_model(sink);
    const auto est = estimate_deviation_tail(det, constant_rule(det, 0),
                                             LossFunction(LossKind::ZeroOneJoint, det.joint_behaviors()),
                                             small_config(30));
    for (const auto& c : est.cells) CHECK(c.hits == 0);
  }
  SUBCASE("non-ergodic chains are rejected") {
    Matrix flip(2, 2);
    flip << 0, 1, 1, 0;
    const McreModel per = testing::chain_model(flip);
    CHECK_THROWS_AS(estimate_deviation_tail(per, stay_rule(per),
                                            LossFunction(LossKind::ZeroOneJoint, per.joint_behaviors()),
                                            small_config(5)),
                    std::domain_error);
  }
}

TEST_CASE("sup deviation tails") {
  const McreModel model = load_model(fixture("single_agent.json"));
  const Simulator sim = Simulator::with_stationary(model);
  const LossFunction loss(LossKind::ZeroOneJoint, model.joint_behaviors());
  const auto cfg = small_config(150);

  SUBCASE("singleton class equals the single-predictor tail") {
    const Hypothesis f = bayes_rule(model);
    const auto single = estimate_deviation_tail(sim, f, loss, cfg);
    const auto sup = estimate_sup_deviation_tail(sim, HypothesisClass({f}), loss, cfg);
    for (std::size_t i = 0; i < single.cells.size(); ++i) CHECK(single.cells[i].hits == sup.cells[i].hits);
  }
  SUBCASE("identical traces add nothing") {
    // h1 is never emitted, so members that differ only there share every trace
    Matrix k(2, 2);
    k << 0.6, 0.4, 0.3, 0.7;
    const McreModel quiet(BehaviorSpace({"lo", "hi"}), FeedbackSpace({"h0", "h1"}), UserFactorModel{{"u"}, {1.0}},
                          FeedbackFunction(1, 2, {0, 0}), AgentKernelSet({{k, k}}));
    const Simulator qs = Simulator::with_stationary(quiet);
    const LossFunction ql(LossKind::ZeroOneJoint, quiet.joint_behaviors());
    const Hypothesis f = bayes_rule(quiet);
    auto table = f.table();
    table[1 * 2 + 0] = 1 - table[1 * 2 + 0];
    const HypothesisClass pair({f, Hypothesis(2, 2, table, "twin")});
    const auto single = estimate_deviation_tail(qs, f, ql, cfg);
    const auto sup = estimate_sup_deviation_tail(qs, pair, ql, cfg);
    for (std::size_t i = 0; i < single.cells.size(); ++i) CHECK(single.cells[i].hits == sup.cells[i].hits);
  }
  SUBCASE("the sup tail dominates every member") {
    const HypothesisClass cls = enumerate_all_hypotheses(load_model(fixture("two_state.json")));
    const McreModel two = load_model(fixture("two_state.json"));
    const Simulator s2 = Simulator::with_stationary(two);
    const LossFunction l2(LossKind::ZeroOneJoint, two.joint_behaviors());
    auto members = reference_class(model, 20, 5).members();
    members.erase(members.begin() + 8, members.end());
    const HypothesisClass eight(members);
    REQUIRE(eight.size() == 8);
    const auto sup = estimate_sup_deviation_tail(sim, eight, loss, cfg);
    for (const auto& f : eight.members()) {
      const auto one = estimate_deviation_tail(sim, f, loss, cfg);
      for (std::size_t i = 0; i < one.cells.size(); ++i) CHECK(sup.cells[i].hits >= one.cells[i].hits);
    }
    CHECK(estimate_sup_deviation_tail(s2, cls, l2, cfg).cells.size() == cfg.t_grid.size() * cfg.eps_grid.size());
  }
}

TEST_CASE("dominance verdicts") {
  TailEstimate est;
  est.t_grid = {1000};
  est.eps_grid = {0.1, 0.2, 0.3, 0.4};
  est.cells = {{1000, 0.1, 0, 2000, 0.0, clopper_pearson(0, 2000, 0.99).upper},
               {1000, 0.2, 1000, 2000, 0.5, clopper_pearson(1000, 2000, 0.99).upper},
               {1000, 0.3, 0, 2000, 0.0, clopper_pearson(0, 2000, 0.99).upper},
               {1000, 0.4, 0, 2000, 0.0, clopper_pearson(0, 2000, 0.99).upper}};
  const auto report = dominance_check(est, {1e-5, 0.01, 0.5, 1.0});
  CHECK(report.cells[0].verdict == Verdict::Inconclusive);
  CHECK(report.cells[1].verdict == Verdict::Fail);
  CHECK(report.cells[2].verdict == Verdict::Pass);
  CHECK(report.cells[3].verdict == Verdict::Vacuous);
  CHECK(report.informative() == 3);
  CHECK_FALSE(report.ok());

  const auto all_vacuous = dominance_check(est, {1.0, 1.0, 1.0, 1.0});
  CHECK(all_vacuous.informative() == 0);
  CHECK(all_vacuous.ok());
  CHECK_THROWS(dominance_check(est, {1.0}));
}

TEST_CASE("pointwise bound grid") {
  const LiftedChain c = build_lifted_chain(load_model(fixture("single_agent.json")));
  const auto report = analyze_chain(c.matrix());
  const auto grid = pointwise_bound_grid(report, c.size(), 1.0, {100, 10000}, {0.1, 0.3});
  REQUIRE(grid.size() == 4);
  for (std::size_t ti = 0; ti < 2; ++ti)
    for (std::size_t ei = 0; ei < 2; ++ei) {
      const std::size_t t = ti ? 10000 : 100;
      const double eps = ei ? 0.3 : 0.1;
      const double thr = pointwise_threshold(1.0, *report.n0, *report.delta, c.size(), eps);
      if (double(t) > thr)
        CHECK(grid[ti * 2 + ei] == pointwise_bound(1.0, *report.n0, *report.delta, c.size(), t, eps));
      else
        CHECK(grid[ti * 2 + ei] == std::numeric_limits<double>::infinity());
    }
}

TEST_CASE("two-state fixture at T=1000, eps=0.1 stays under the bound") {
  const McreModel model = load_model(fixture("two_state.json"));
  const Simulator sim = Simulator::with_stationary(model);
  const LossFunction loss(LossKind::ZeroOneJoint, model.joint_behaviors());
  TailExperimentConfig cfg = small_config(2000);
  cfg.t_grid = {1000};
  cfg.eps_grid = {0.1};
  const auto est = estimate_deviation_tail(sim, bayes_rule(model), loss, cfg);
  const auto report = analyze_chain(sim.chain().matrix());
  const auto bounds = pointwise_bound_grid(report, sim.chain().size(), 1.0, cfg.t_grid, cfg.eps_grid);
  const auto dom = dominance_check(est, bounds);
  CHECK(dom.cells[0].tail.freq <= dom.cells[0].bound.clamped);
  CHECK(dom.ok());
}

TEST_CASE("occupancy check") {
  Matrix sink(2, 2);
  sink << 1, 0, 1, 0;
  CHECK(pi_occupancy_check(testing::chain_model(sink), 100, 1) == 0.0);
  const McreModel two = load_model(fixture("two_state.json"));
  const Simulator sim = Simulator::with_stationary(two);
  // one round: all mass on z_1
  TrajectoryConfig cfg;
  cfg.rounds = 1;
  cfg.seed = 4;
  const auto z1 = *sim.chain().index_of(sim.sample(cfg).z[0]);
  CHECK(pi_occupancy_check(sim, 1, 4) == doctest::Approx(1.0 - sim.stationary().pi(z1)));
  CHECK(pi_occupancy_check(sim, 200000, 4) <= 0.02);
}

TEST_CASE("csv writers") {
  const McreModel model = load_model(fixture("two_state.json"));
  const Simulator sim = Simulator::with_stationary(model);
  const LossFunction loss(LossKind::ZeroOneJoint, model.joint_behaviors());
  const auto est = estimate_deviation_tail(sim, bayes_rule(model), loss, small_config(20));
  const auto dom = dominance_check(est, std::vector<double>(est.cells.size(), 0.5));
  const auto dir = std::filesystem::temp_directory_path() / "mcre_verify_csv";
  std::filesystem::create_directories(dir);
  write_tails_csv(dir / "tails.csv", est);
  write_dominance_csv(dir / "dominance.csv", dom);
  write_plot_data_csv(dir / "plot.csv", dom);
  CHECK(first_line(dir / "tails.csv") == "T,eps,hits,freq,cp_upper");
  CHECK(first_line(dir / "dominance.csv").rfind("T,eps,hits,freq,cp_upper,bound,vacuous,verdict", 0) == 0);
  CHECK(first_line(dir / "plot.csv") == "T,eps,empirical_freq,empirical_cp_upper,bound_clamped");
  std::filesystem::remove_all(dir);
}
