#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mcre/analysis.hpp"
#include "mcre/lifted_chain.hpp"
#include "mcre/model_io.hpp"
#include "test_models.hpp"

using namespace mcre;
using mcre::testing::fixture;

namespace {

using BoolMatrix = std::vector<std::vector<bool>>;

BoolMatrix support(const Matrix& m) {
  BoolMatrix b(m.rows(), std::vector<bool>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) b[i][j] = m(i, j) > 0.0;
  return b;
}

BoolMatrix bool_mul(const BoolMatrix& a, const BoolMatrix& b) {
  const std::size_t n = a.size();
  BoolMatrix c(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (a[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (b[k][j]) c[i][j] = true;
  return c;
}

bool oracle_irreducible(const Matrix& m) {
  const std::size_t n = m.rows();
  const BoolMatrix s = support(m);
  BoolMatrix reach = s, power = s;
  for (std::size_t step = 2; step <= n; ++step) {
    power = bool_mul(power, s);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) reach[i][j] = reach[i][j] || power[i][j];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && !reach[i][j]) return false;
  return true;
}

// gcd of return times to state 0 up to length `max_len`.
std::size_t oracle_period(const Matrix& m, std::size_t max_len) {
  const BoolMatrix s = support(m);
  BoolMatrix power = s;
  std::size_t g = 0;
  for (std::size_t d = 1; d <= max_len; ++d) {
    if (power[0][0]) g = std::gcd(g, d);
    power = bool_mul(power, s);
  }
  return g;
}

// Repeated multiplication until every entry is positive.
std::optional<std::pair<std::size_t, double>> oracle_n0(const Matrix& m) {
  const std::size_t z = m.rows();
  const std::size_t cap = z * z - 2 * z + 2;
  Matrix p = m;
  for (std::size_t n = 1; n <= cap; ++n) {
    if ((p.array() > 0.0).all()) return std::make_pair(n, p.minCoeff());
    p = p * m;
  }
  return std::nullopt;
}

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix permutation(std::mt19937_64& gen, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), gen);
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, p[i]) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("irreducibility") {
  CHECK(is_irreducible(mat({{0.5, 0.5}, {0.5, 0.5}})));
  CHECK_FALSE(is_irreducible(mat({{1, 0}, {0.5, 0.5}})));
  std::mt19937_64 gen(17);
  int irreducible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Matrix m = testing::random_stochastic(gen, 6, 0.75);
    const bool expected = oracle_irreducible(m);
    irreducible += expected;
    CHECK(is_irreducible(m) == expected);
  }
  // the sample exercises both outcomes
  CHECK(irreducible > 10);
  CHECK(irreducible < 290);
}

TEST_CASE("period") {
  CHECK(period(mat({{0.5, 0.5}, {1, 0}})) == 1);
  CHECK(period(mat({{0, 1}, {1, 0}})) == 2);
  CHECK_THROWS_AS(period(mat({{1, 0}, {0.5, 0.5}})), std::domain_error);
  SUBCASE("cycle with a chord") {
    // 0->1->2->3->0 plus 1->3: cycles of length 4 and 3
    const Matrix m = mat({{0, 1, 0, 0}, {0, 0, 0.5, 0.5}, {0, 0, 0, 1}, {1, 0, 0, 0}});
    CHECK(period(m) == oracle_period(m, 20));
    CHECK(period(m) == 1);
    // 0->1->2->3->4->5->0 plus 2->5: lengths 6 and 4, gcd 2
    Matrix k = Matrix::Zero(6, 6);
    for (int i = 0; i < 6; ++i) k(i, (i + 1) % 6) = 1.0;
    k(2, 3) = 0.5;
    k(2, 5) = 0.5;
    CHECK(period(k) == oracle_period(k, 20));
    CHECK(period(k) == 2);
  }
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix m = testing::random_stochastic(gen, 5, 0.8);
    if (!oracle_irreducible(m)) continue;
    CHECK(period(m) == oracle_period(m, 40));
  }
}

TEST_CASE("find_n0_delta") {
  const auto pos = find_n0_delta(mat({{0.9, 0.1}, {0.2, 0.8}}));
  REQUIRE(pos);
  CHECK(pos->n0 == 1);
  CHECK(pos->delta == 0.1);
  CHECK_FALSE(find_n0_delta(mat({{0, 1}, {1, 0}})));
  CHECK(wielandt_cap(4) == 10);

  SUBCASE("Wielandt's extremal matrix reaches the cap") {
    const std::size_t z = 5;
    Matrix w = Matrix::Zero(z, z);
    for (std::size_t i = 0; i + 1 < z; ++i) w(i, i + 1) = 1.0;
    w(z - 1, 0) = 0.5;
    w(z - 1, 1) = 0.5;
    const auto r = find_n0_delta(w);
    REQUIRE(r);
    CHECK(r->n0 == wielandt_cap(z));
  }
  SUBCASE("agrees with repeated multiplication") {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t z = std::uniform_int_distribution<std::size_t>(1, 30)(gen);
      const Matrix m = testing::random_stochastic(gen, z, trial % 2 ? 0.85 : 0.5);
      const auto got = find_n0_delta(m);
      const auto want = oracle_n0(m);
      REQUIRE(got.has_value() == want.has_value());
      if (got) {
        CHECK(got->n0 == want->first);
        CHECK(got->delta == doctest::Approx(want->second).epsilon(1e-9));
      }
    }
  }
  SUBCASE("permutations are never primitive") {
    std::mt19937_64 gen(9);
    for (std::size_t z = 2; z <= 30; ++z) CHECK_FALSE(find_n0_delta(permutation(gen, z)));
  }
}

TEST_CASE("stationary distribution") {
  SUBCASE("doubly stochastic gives uniform") {
    const Matrix m = mat({{0.2, 0.5, 0.3}, {0.5, 0.2, 0.3}, {0.3, 0.3, 0.4}});
    const auto st = stationary_distribution(m);
    for (int i = 0; i < 3; ++i) CHECK(st.pi(i) == doctest::Approx(1.0 / 3).epsilon(1e-10));
  }
  SUBCASE("two-state closed form") {
    const auto st = stationary_distribution(mat({{0.9, 0.1}, {0.2, 0.8}}));
    CHECK(st.pi(0) == doctest::Approx(2.0 / 3).epsilon(1e-10));
    CHECK(st.pi(1) == doctest::Approx(1.0 / 3).epsilon(1e-10));
  }
  SUBCASE("periodic chains are rejected") {
    CHECK_THROWS_AS(stationary_distribution(mat({{0, 1}, {1, 0}})), std::domain_error);
  }
  SUBCASE("power iteration agrees with the linear solve") {
    for (const char* name : {"two_state.json", "single_agent.json", "two_agent.json", "three_behavior.json"}) {
      const LiftedChain c = build_lifted_chain(load_model(fixture(name)));
      const auto st = stationary_distribution(c.matrix());
      const auto lin = stationary_by_linear_solve(c.matrix());
      CHECK(st.residual <= 1e-10);
      CHECK(stationary_residual(c.matrix(), st.pi) == doctest::Approx(st.residual));
      CHECK(0.5 * (st.pi - lin.pi).cwiseAbs().sum() <= 1e-8);
    }
  }
}

TEST_CASE("beta mixing") {
  SUBCASE("iid rows") {
    Vector pi(3);
    pi << 0.5, 0.25, 0.25;
    Matrix m(3, 3);
    for (int i = 0; i < 3; ++i) m.row(i) = pi.transpose();
    for (double b : beta_mixing(m, pi, 20).betas) CHECK(b == 0.0);
  }
  SUBCASE("identity with uniform pi") {
    const std::size_t z = 4;
    const Vector pi = Vector::Constant(z, 1.0 / z);
    for (double b : beta_mixing(Matrix::Identity(z, z), pi, 10).betas)
      CHECK(b == doctest::Approx(1.0 - 1.0 / z).epsilon(1e-12));
  }
  SUBCASE("two-state eigen form") {
    const Matrix m = mat({{0.9, 0.1}, {0.2, 0.8}});
    const Vector pi = stationary_distribution(m).pi;
    const auto prof = beta_mixing(m, pi, 200);
    // M^m = 1 pi + 0.7^m (I - 1 pi), so every row is 0.7^m away from pi in TV scaled by pi
    for (std::size_t k = 1; k <= 200; ++k)
      CHECK(std::abs(prof.at(k) - 2 * pi(0) * pi(1) * std::pow(0.7, double(k))) <= 1e-9);
  }
  SUBCASE("non-increasing on fixture chains") {
    for (const char* name : {"two_state.json", "single_agent.json", "two_agent.json", "three_behavior.json"}) {
      const LiftedChain c = build_lifted_chain(load_model(fixture(name)));
      const auto prof = beta_mixing(c.matrix(), stationary_distribution(c.matrix()).pi, 200);
      for (std::size_t k = 1; k < prof.betas.size(); ++k) CHECK(prof.betas[k] <= prof.betas[k - 1] + 1e-15);
    }
  }
  CHECK_THROWS(beta_mixing(Matrix::Identity(2, 2), Vector::Constant(2, 0.5), 0));
}

TEST_CASE("assumption checks") {
  SUBCASE("positive kernels and full feedback coverage pass") {
    const auto r = check_assumptions(load_model(fixture("single_agent.json")));
    CHECK(r.a1_ok);
    CHECK(r.a2_ok);
    CHECK(r.per_agent_primitive);
  }
  SUBCASE("a feedback label that is never emitted breaks A.2") {
    const McreModel m(BehaviorSpace({"x", "y"}), FeedbackSpace({"h0", "h1"}), UserFactorModel{{"u"}, {1.0}},
                      FeedbackFunction(1, 2, {0, 0}),
                      AgentKernelSet({{mat({{0.5, 0.5}, {0.5, 0.5}}), mat({{0.5, 0.5}, {0.5, 0.5}})}}));
    const auto r = check_assumptions(m);
    CHECK_FALSE(r.a2_ok);
    CHECK(r.a2_violations.size() == 2);
    for (const auto& g : r.a2_violations) CHECK(g.joint_feedback == 1);
  }
  SUBCASE("a periodic kernel breaks A.1") {
    const McreModel m(BehaviorSpace({"x", "y"}), FeedbackSpace({"h0", "h1"}), UserFactorModel{{"u", "v"}, {0.5, 0.5}},
                      FeedbackFunction(2, 2, {0, 0, 1, 1}),
                      AgentKernelSet({{mat({{0.5, 0.5}, {0.5, 0.5}}), mat({{0, 1}, {1, 0}})}}));
    const auto r = check_assumptions(m);
    CHECK_FALSE(r.a1_ok);
    REQUIRE(r.a1_failures.size() == 1);
    CHECK(r.a1_failures[0].joint_feedback == 1);
    CHECK(r.a1_failures[0].period == std::optional<std::size_t>(2));
  }
}

TEST_CASE("random models satisfying the assumptions give ergodic lifted chains") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 20; ++trial) {
    const McreModel model = testing::random_assumption_model(gen);
    const LiftedChain c = build_lifted_chain(model, {.prune = true});
    const auto report = analyze_chain(c.matrix());
    CHECK(report.irreducible);
    CHECK(report.period == std::optional<std::size_t>(1));
    REQUIRE(report.n0);
    CHECK(*report.n0 <= report.wielandt_cap);
  }
}
