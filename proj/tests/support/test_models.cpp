#include "test_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcre/analysis.hpp"

#ifndef MCRE_FIXTURE_DIR
#error "MCRE_FIXTURE_DIR must be defined"
#endif

namespace mcre::testing {

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(MCRE_FIXTURE_DIR) / name; }

RandomModelSpec random_spec(std::mt19937_64& gen) {
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(gen); };
  RandomModelSpec s;
  s.agents = pick(1, 2);
  s.behaviors = pick(1, 3);
  s.feedbacks = pick(1, 2);
  s.users = pick(1, 4);
  s.zero_prob = std::uniform_real_distribution<double>(0.0, 0.6)(gen);
  return s;
}

Matrix random_stochastic(std::mt19937_64& gen, std::size_t n, double zero_prob) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = unit(gen) < zero_prob ? 0.0 : 0.05 + unit(gen);
      sum += m(i, j);
    }
    if (sum == 0.0) {
      const auto j = std::uniform_int_distribution<std::size_t>(0, n - 1)(gen);
      m(i, j) = 1.0;
      sum = 1.0;
    }
    m.row(i) /= sum;
  }
  return m;
}

namespace {

std::vector<std::string> labels(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::vector<double> random_probs(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  std::vector<double> p(n);
  for (auto& x : p) x = unit(gen);
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= sum;
  return p;
}

}  // namespace

McreModel random_model(std::mt19937_64& gen, const RandomModelSpec& spec) {
  const JointSpace jb(spec.behaviors, spec.agents);
  const JointSpace jh(spec.feedbacks, spec.agents);
  std::uniform_int_distribution<std::size_t> any_k(0, jh.size() - 1);
  std::vector<std::size_t> table(spec.users * jb.size());
  for (auto& k : table) k = any_k(gen);
  std::vector<std::vector<Matrix>> kernels(spec.agents);
  for (auto& per_agent : kernels)
    for (std::size_t h = 0; h < spec.feedbacks; ++h)
      per_agent.push_back(random_stochastic(gen, spec.behaviors, spec.zero_prob));
  return McreModel(BehaviorSpace(labels("b", spec.behaviors)), FeedbackSpace(labels("h", spec.feedbacks)),
                   UserFactorModel{labels("u", spec.users), random_probs(gen, spec.users)},
                   FeedbackFunction(spec.users, jb.size(), std::move(table)), AgentKernelSet(std::move(kernels)));
}

McreModel random_assumption_model(std::mt19937_64& gen) {
  for (;;) {
    RandomModelSpec spec = random_spec(gen);
    const std::size_t joint_h = static_cast<std::size_t>(std::pow(spec.feedbacks, spec.agents));
    spec.users = joint_h + std::uniform_int_distribution<std::size_t>(0, 2)(gen);
    const JointSpace jb(spec.behaviors, spec.agents);
    // The first |H^N| user factors hit every joint feedback at every m, so A.2 holds.
    std::vector<std::size_t> table(spec.users * jb.size());
    std::uniform_int_distribution<std::size_t> any_k(0, joint_h - 1);
    for (std::size_t m = 0; m < jb.size(); ++m) {
      std::vector<std::size_t> perm(joint_h);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), gen);
      for (std::size_t u = 0; u < spec.users; ++u) table[u * jb.size() + m] = u < joint_h ? perm[u] : any_k(gen);
    }
    std::vector<std::vector<Matrix>> kernels(spec.agents);
    for (auto& per_agent : kernels)
      for (std::size_t h = 0; h < spec.feedbacks; ++h)
        per_agent.push_back(random_stochastic(gen, spec.behaviors, spec.zero_prob));
    McreModel model(BehaviorSpace(labels("b", spec.behaviors)), FeedbackSpace(labels("h", spec.feedbacks)),
                    UserFactorModel{labels("u", spec.users), random_probs(gen, spec.users)},
                    FeedbackFunction(spec.users, jb.size(), std::move(table)), AgentKernelSet(std::move(kernels)));
    const auto report = check_assumptions(model);
    if (report.a1_ok && report.a2_ok) return model;
  }
}

McreModel chain_model(const Matrix& kernel) {
  const auto n = static_cast<std::size_t>(kernel.rows());
  return McreModel(BehaviorSpace(labels("b", n)), FeedbackSpace({"h"}), UserFactorModel{{"u"}, {1.0}},
                   FeedbackFunction(1, n, std::vector<std::size_t>(n, 0)), AgentKernelSet({{kernel}}));
}

}  // namespace mcre::testing
