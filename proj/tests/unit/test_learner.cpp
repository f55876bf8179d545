#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mcre/analysis.hpp"
#include "mcre/error.hpp"
#include "mcre/learner.hpp"
#include "mcre/model_io.hpp"
#include "mcre/simulator.hpp"
#include "test_models.hpp"

using namespace mcre;
using mcre::testing::fixture;

namespace {

Trajectory stationary_run(const Simulator& sim, std::size_t rounds, std::uint64_t seed) {
  TrajectoryConfig cfg;
  cfg.rounds = rounds;
  cfg.seed = seed;
  return sim.sample(cfg);
}

// Smallest k such that some k member traces cover every trace within eps.
std::size_t oracle_cover(const std::vector<std::vector<double>>& traces, double eps) {
  const std::size_t n = traces.size();
  auto dist = [&](std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t t = 0; t < traces[a].size(); ++t) d = std::max(d, std::abs(traces[a][t] - traces[b][t]));
    return d;
  };
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + k, true);
    do {
      bool ok = true;
      for (std::size_t x = 0; x < n && ok; ++x) {
        bool hit = false;
        for (std::size_t c = 0; c < n && !hit; ++c) hit = pick[c] && dist(x, c) <= eps;
        ok = hit;
      }
      if (ok) return k;
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return n;
}

}  // namespace

TEST_CASE("empirical risk") {
  const McreModel model = load_model(fixture("two_state.json"));
  const LossFunction loss(LossKind::ZeroOneJoint, model.joint_behaviors());
  Trajectory t;
  t.z = {{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {0, 1, 1}};
  const Hypothesis stay = stay_rule(model);
  CHECK(empirical_risk(stay, t, loss) == 0.25);

  Trajectory steady;
  steady.z = {{0, 1, 1}, {0, 1, 1}, {0, 1, 1}};
  CHECK(empirical_risk(stay, steady, loss) == 0.0);
  CHECK(empirical_risk(constant_rule(model, 0), steady, loss) == 1.0);
  CHECK_THROWS_AS(empirical_risk(stay, Trajectory{}, loss), std::invalid_argument);
}

TEST_CASE("hamming loss counts agents") {
  const McreModel model = load_model(fixture("two_agent.json"));
  const LossFunction loss(LossKind::HammingPerAgent, model.joint_behaviors());
  CHECK(loss.bound() == 2.0);
  const Hypothesis zero = constant_rule(model, 0);  // (lo, lo)
  CHECK(loss(zero, {0, 0, 0}) == 0.0);
  CHECK(loss(zero, {0, 0, 1}) == 1.0);
  CHECK(loss(zero, {0, 0, 3}) == 2.0);
}

TEST_CASE("expected risk") {
  SUBCASE("deterministic orbit, exact predictor") {
    Matrix cyc = Matrix::Zero(3, 3);
    cyc(0, 1) = cyc(1, 2) = cyc(2, 0) = 1.0;
    const McreModel det = testing::chain_model(cyc);
    const LossFunction loss(LossKind::ZeroOneJoint, det.joint_behaviors());
    const LiftedChain c = build_lifted_chain(det);
    // point mass on the state (h, b=1, b_next=2)
    Vector pi = Vector::Zero(c.size());
    pi(*c.index_of({0, 1, 2})) = 1.0;
    CHECK(expected_risk(bayes_rule(det), c, pi, loss) == 0.0);
    CHECK(expected_risk(stay_rule(det), c, pi, loss) == 1.0);
  }
  SUBCASE("matches long-run averages on every fixture model") {
    for (const char* name : {"two_state.json", "single_agent.json", "two_agent.json", "three_behavior.json"}) {
      const McreModel model = load_model(fixture(name));
      const Simulator sim = Simulator::with_stationary(model);
      const Trajectory t = stationary_run(sim, 200000, 31);
      const HypothesisClass cls = reference_class(model, 2, 1);
      for (const LossKind kind : {LossKind::ZeroOneJoint, LossKind::HammingPerAgent}) {
        const LossFunction loss(kind, model.joint_behaviors());
        for (const Hypothesis& f : cls.members()) {
          const double exact = expected_risk(f, sim.chain(), sim.stationary().pi, loss);
          CHECK(exact >= 0.0);
          CHECK(exact <= loss.bound());
          CHECK_MESSAGE(std::abs(empirical_risk(f, t, loss) - exact) <= 0.01, name << " " << f.name());
        }
      }
    }
  }
}

TEST_CASE("erm") {
  const McreModel model = load_model(fixture("single_agent.json"));
  const LossFunction loss(LossKind::ZeroOneJoint, model.joint_behaviors());
  const Simulator sim = Simulator::with_stationary(model);
  const Trajectory t = stationary_run(sim, 20000, 2);

  SUBCASE("singleton") {
    const HypothesisClass one({constant_rule(model, 1)});
    CHECK(erm(one, t, loss).index == 0);
  }
  SUBCASE("the generating argmax rule wins against a constant rule") {
    const Hypothesis bayes = bayes_rule(model);
    const Hypothesis c0 = constant_rule(model, 0);
    const double rb = expected_risk(bayes, sim.chain(), sim.stationary().pi, loss);
    const double rc = expected_risk(c0, sim.chain(), sim.stationary().pi, loss);
    REQUIRE(rb < rc);
    const HypothesisClass cls({c0, bayes});
    CHECK(erm(cls, t, loss).index == 1);
  }
  SUBCASE("ties go to the lower index") {
    // differ only on an input the trajectory never shows
    Trajectory steady;
    steady.z = {{0, 1, 1}, {0, 1, 0}};
    auto table = stay_rule(model).table();
    table[1 * 2 + 0] = 1;  // (noclick, lo) -> hi
    const HypothesisClass cls({Hypothesis(2, 2, table, "b"), stay_rule(model)});
    const auto r = erm(cls, steady, loss);
    CHECK(r.member_risks[0] == r.member_risks[1]);
    CHECK(r.index == 0);
  }
  SUBCASE("optimality over the class") {
    const HypothesisClass cls = reference_class(model, 6, 3);
    const auto r = erm(cls, t, loss);
    for (std::size_t i = 0; i < cls.size(); ++i) CHECK(r.empirical_risk <= empirical_risk(cls[i], t, loss));
  }
}

TEST_CASE("covering number on a sample") {
  const McreModel model = load_model(fixture("two_agent.json"));
  const Simulator sim = Simulator::with_stationary(model);
  const Trajectory t = stationary_run(sim, 40, 6);
  const HypothesisClass cls = reference_class(model, 6, 4);
  REQUIRE(cls.size() <= kExactCoverLimit);

  SUBCASE("zero-one loss counts distinct traces") {
    const LossFunction loss(LossKind::ZeroOneJoint, model.joint_behaviors());
    std::set<std::vector<double>> distinct;
    for (const auto& f : cls.members()) distinct.insert(loss_trace(f, t, loss));
    const auto r = covering_number_on_sample(cls, loss, t, 0.5);
    CHECK(r.exact);
    CHECK(r.size == distinct.size());
    CHECK(r.distinct_traces == distinct.size());
    CHECK(covering_number_on_sample(cls, loss, t, 1.0).size == 1);
  }
  SUBCASE("all members share one trace") {
    const LossFunction loss(LossKind::ZeroOneJoint, model.joint_behaviors());
    Trajectory one;
    one.z = {{0, 0, 0}};
    const HypothesisClass same({constant_rule(model, 0), bayes_rule(model)});
    if (loss_trace(same[0], one, loss) == loss_trace(same[1], one, loss))
      CHECK(covering_number_on_sample(same, loss, one, 0.1).size == 1);
  }
  SUBCASE("hamming loss agrees with subset enumeration and is monotone") {
    const LossFunction loss(LossKind::HammingPerAgent, model.joint_behaviors());
    std::vector<std::vector<double>> traces;
    for (const auto& f : cls.members()) traces.push_back(loss_trace(f, t, loss));
    std::size_t previous = cls.size() + 1;
    for (const double eps : {0.5, 1.0, 1.5, 2.0}) {
      const auto r = covering_number_on_sample(cls, loss, t, eps);
      CHECK(r.size == oracle_cover(traces, eps));
      CHECK(r.size <= std::min(cls.size(), r.distinct_traces));
      CHECK(r.size <= previous);
      previous = r.size;
    }
  }
  SUBCASE("greedy above the exhaustive limit is an upper bound") {
    const HypothesisClass big = reference_class(model, 40, 9);
    REQUIRE(big.size() > kExactCoverLimit);
    const LossFunction loss(LossKind::ZeroOneJoint, model.joint_behaviors());
    const auto r = covering_number_on_sample(big, loss, t, 0.5);
    CHECK_FALSE(r.exact);
    CHECK(r.size == r.distinct_traces);
  }
}

TEST_CASE("growth bound") {
  CHECK(growth_bound(10, 2, 1) == doctest::Approx(10 * std::exp(1.0) * 9));
  // (10 e 9 / 2)^2 = (45 e)^2 = 2025 e^2 ~ 14962.84
  CHECK(std::abs(growth_bound(10, 2, 2) - 2025.0 * std::exp(2.0)) <= 1e-9);
  double previous = 0.0;
  for (double t = 1; t <= 1000; t *= 2) {
    CHECK(growth_bound(t, 3, 2) > previous);
    previous = growth_bound(t, 3, 2);
  }
}

TEST_CASE("hypothesis classes") {
  const McreModel model = load_model(fixture("two_state.json"));
  const HypothesisClass all = enumerate_all_hypotheses(model);
  CHECK(all.size() == 4);  // 2^2 tables over 2 inputs
  CHECK_THROWS_AS(enumerate_all_hypotheses(load_model(fixture("two_agent.json"))), ConfigError);
  CHECK_THROWS_AS(HypothesisClass({stay_rule(model), stay_rule(model)}), ModelError);
  CHECK_THROWS_AS(HypothesisClass(std::vector<Hypothesis>{}), ModelError);

  const McreModel two = load_model(fixture("two_agent.json"));
  const HypothesisClass ref = reference_class(two, 5, 11);
  CHECK(ref[0] == bayes_rule(two));
  const HypothesisClass back = class_from_json(class_to_json(ref, two), two);
  REQUIRE(back.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(back[i] == ref[i]);
    CHECK(back[i].name() == ref[i].name());
  }
  CHECK(reference_class(two, 5, 11).members() == ref.members());
}
