#include "mcre/learner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <stdexcept>

#include "mcre/error.hpp"
#include "mcre/model_io.hpp"

namespace mcre {

using nlohmann::json;

Hypothesis::Hypothesis(std::size_t joint_feedbacks, std::size_t joint_behaviors,
                       std::vector<std::size_t> table, std::string name)
    : joint_feedbacks_(joint_feedbacks),
      joint_behaviors_(joint_behaviors),
      table_(std::move(table)),
      name_(std::move(name)) {
  if (table_.size() != joint_feedbacks_ * joint_behaviors_)
    throw ModelError("hypothesis: table must cover all of H^N x B^N (" +
                     std::to_string(joint_feedbacks_ * joint_behaviors_) + " entries)");
  for (auto v : table_)
    if (v >= joint_behaviors_) throw ModelError("hypothesis: prediction out of range");
}

HypothesisClass::HypothesisClass(std::vector<Hypothesis> members) : members_(std::move(members)) {
  if (members_.empty()) throw ModelError("hypothesis class: empty");
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (members_[i].table().size() != members_[0].table().size() ||
        members_[i].joint_behaviors() != members_[0].joint_behaviors())
      throw ModelError("hypothesis class: member " + std::to_string(i) + " has a different shape");
    for (std::size_t j = 0; j < i; ++j)
      if (members_[i] == members_[j])
        throw ModelError("hypothesis class: members " + std::to_string(j) + " and " +
                         std::to_string(i) + " are identical");
  }
}

std::vector<double> loss_trace(const Hypothesis& f, const Trajectory& traj, const LossFunction& loss) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& z : traj.z) out.push_back(loss(f, z));
  return out;
}

double empirical_risk(const Hypothesis& f, const Trajectory& traj, const LossFunction& loss) {
  if (traj.z.empty()) throw std::invalid_argument("empirical_risk: empty trajectory");
  double sum = 0.0;
  for (const auto& z : traj.z) sum += loss(f, z);
  return sum / static_cast<double>(traj.size());
}

double expected_risk(const Hypothesis& f, const LiftedChain& chain, const Vector& pi,
                     const LossFunction& loss) {
  if (pi.size() != static_cast<Eigen::Index>(chain.size()))
    throw std::invalid_argument("expected_risk: pi has wrong length");
  double sum = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const double w = pi[static_cast<Eigen::Index>(i)];
    if (w != 0.0) sum += w * loss(f, chain.state(i));
  }
  return sum;
}

ErmResult erm(const HypothesisClass& cls, const Trajectory& traj, const LossFunction& loss) {
  ErmResult result;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    const double r = empirical_risk(cls[i], traj, loss);
    result.member_risks.push_back(r);
    if (i == 0 || r < result.empirical_risk) {
      result.index = i;
      result.empirical_risk = r;
    }
  }
  return result;
}

CoverResult covering_number_on_sample(const HypothesisClass& cls, const LossFunction& loss,
                                      const Trajectory& traj, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("covering_number_on_sample: eps must be positive");
  std::vector<std::vector<double>> traces;
  for (const auto& f : cls.members()) {
    auto t = loss_trace(f, traj, loss);
    if (std::find(traces.begin(), traces.end(), t) == traces.end()) traces.push_back(std::move(t));
  }
  const std::size_t n = traces.size();
  const auto distance = [&](std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t t = 0; t < traces[a].size(); ++t) d = std::max(d, std::abs(traces[a][t] - traces[b][t]));
    return d;
  };
  // ball[i]: traces within eps of trace i
  std::vector<std::vector<char>> within(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) within[i][j] = within[j][i] = distance(i, j) <= eps;

  CoverResult result;
  result.distinct_traces = n;
  if (cls.size() <= kExactCoverLimit) {
    std::vector<std::uint32_t> ball(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (within[i][j]) ball[i] |= std::uint32_t{1} << j;
    const std::uint32_t all = n == 32 ? ~0u : (std::uint32_t{1} << n) - 1;
    std::size_t best = n;
    for (std::uint32_t subset = 1; subset <= all && subset != 0; ++subset) {
      const auto count = static_cast<std::size_t>(std::popcount(subset));
      if (count >= best) continue;
      std::uint32_t covered = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (subset >> i & 1) covered |= ball[i];
      if (covered == all) best = count;
    }
    result.size = best;
    result.exact = true;
    return result;
  }

  std::vector<char> covered(n, 0);
  std::size_t remaining = n;
  while (remaining > 0) {
    std::size_t pick = 0, gain = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t g = 0;
      for (std::size_t j = 0; j < n; ++j) g += within[i][j] && !covered[j];
      if (g > gain) {
        gain = g;
        pick = i;
      }
    }
    for (std::size_t j = 0; j < n; ++j)
      if (within[pick][j] && !covered[j]) {
        covered[j] = 1;
        --remaining;
      }
    ++result.size;
  }
  result.exact = false;
  return result;
}

double growth_bound(double rounds, std::size_t behavior_count, std::size_t natarajan_d) {
  if (rounds < 1.0) throw std::invalid_argument("growth_bound: T must be at least 1");
  if (natarajan_d < 1) throw std::invalid_argument("growth_bound: d must be at least 1");
  const double b1 = static_cast<double>(behavior_count) + 1.0;
  const double d = static_cast<double>(natarajan_d);
  return std::pow(2.0 * rounds * std::numbers::e * b1 * b1 / (2.0 * d), d);
}

namespace {

Hypothesis from_rule(const McreModel& model, std::string name,
                     const std::function<std::size_t(std::size_t, std::size_t)>& rule) {
  const std::size_t nh = model.joint_feedbacks().size();
  const std::size_t nb = model.joint_behaviors().size();
  std::vector<std::size_t> table(nh * nb);
  for (std::size_t h = 0; h < nh; ++h)
    for (std::size_t b = 0; b < nb; ++b) table[h * nb + b] = rule(h, b);
  return Hypothesis(nh, nb, std::move(table), std::move(name));
}

}  // namespace

Hypothesis bayes_rule(const McreModel& model) {
  const auto& jb = model.joint_behaviors();
  const auto& jh = model.joint_feedbacks();
  return from_rule(model, "bayes", [&](std::size_t h, std::size_t b) {
    std::size_t next = 0;
    for (std::size_t a = 0; a < model.agents(); ++a) {
      const Matrix& k = model.kernels().kernel(a, jh.digit(h, a));
      Eigen::Index best = 0;
      k.row(static_cast<Eigen::Index>(jb.digit(b, a))).maxCoeff(&best);
      next = next * jb.base() + static_cast<std::size_t>(best);
    }
    return next;
  });
}

Hypothesis stay_rule(const McreModel& model) {
  return from_rule(model, "stay", [](std::size_t, std::size_t b) { return b; });
}

Hypothesis constant_rule(const McreModel& model, std::size_t joint_behavior) {
  if (joint_behavior >= model.joint_behaviors().size())
    throw std::invalid_argument("constant_rule: behavior out of range");
  return from_rule(model, "constant:" + model.joint_behavior_label(joint_behavior),
                   [=](std::size_t, std::size_t) { return joint_behavior; });
}

Hypothesis random_rule(const McreModel& model, CounterRng& rng) {
  const std::size_t nb = model.joint_behaviors().size();
  return from_rule(model, "random", [&](std::size_t, std::size_t) {
    return static_cast<std::size_t>(rng() % nb);
  });
}

HypothesisClass enumerate_all_hypotheses(const McreModel& model) {
  const std::size_t nh = model.joint_feedbacks().size();
  const std::size_t nb = model.joint_behaviors().size();
  const std::size_t inputs = nh * nb;
  if (inputs > 8 || nb > 4)
    throw ConfigError("enumerate_all_hypotheses: only for |H^N x B^N| <= 8 and |B^N| <= 4 (got " +
                      std::to_string(inputs) + " inputs, " + std::to_string(nb) + " outputs)");
  std::size_t total = 1;
  for (std::size_t i = 0; i < inputs; ++i) total *= nb;
  std::vector<Hypothesis> members;
  members.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<std::size_t> table(inputs);
    std::size_t rest = code;
    for (std::size_t i = inputs; i-- > 0;) {
      table[i] = rest % nb;
      rest /= nb;
    }
    members.emplace_back(nh, nb, std::move(table), "table" + std::to_string(code));
  }
  return HypothesisClass(std::move(members));
}

HypothesisClass reference_class(const McreModel& model, std::size_t random_members, std::uint64_t seed) {
  std::vector<Hypothesis> members;
  const auto add = [&](Hypothesis h) {
    if (std::find(members.begin(), members.end(), h) == members.end()) members.push_back(std::move(h));
  };
  add(bayes_rule(model));
  add(stay_rule(model));
  for (std::size_t b = 0; b < model.joint_behaviors().size(); ++b) add(constant_rule(model, b));
  CounterRng rng(seed, 0);
  for (std::size_t i = 0; i < random_members; ++i) add(random_rule(model, rng));
  return HypothesisClass(std::move(members));
}

Hypothesis hypothesis_from_json(const json& doc, const McreModel& model) {
  if (!doc.is_object() || !doc.contains("table") || !doc["table"].is_object())
    throw ModelError("hypothesis: expected an object with a 'table' object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "table" && it.key() != "name")
      throw ModelError("hypothesis: unknown key '" + it.key() + "'");
  const std::size_t nh = model.joint_feedbacks().size();
  const std::size_t nb = model.joint_behaviors().size();
  const auto parse = [](const std::string& text, const auto& space, const JointSpace& joint) {
    const auto parts = split(text, ',');
    if (parts.size() != joint.agents())
      throw ModelError("hypothesis: '" + text + "' has the wrong number of components");
    std::vector<std::size_t> digits;
    for (const auto& p : parts) {
      const auto i = space.index_of(p);
      if (!i) throw ModelError("hypothesis: unknown label '" + p + "'");
      digits.push_back(*i);
    }
    return joint.encode(digits);
  };
  std::vector<std::size_t> table(nh * nb);
  std::vector<char> seen(nh * nb, 0);
  for (auto it = doc["table"].begin(); it != doc["table"].end(); ++it) {
    const auto bar = it.key().find('|');
    if (bar == std::string::npos) throw ModelError("hypothesis: key '" + it.key() + "' lacks '|'");
    const auto h = parse(it.key().substr(0, bar), model.feedbacks(), model.joint_feedbacks());
    const auto b = parse(it.key().substr(bar + 1), model.behaviors(), model.joint_behaviors());
    if (!it.value().is_string()) throw ModelError("hypothesis: value for '" + it.key() + "' must be a string");
    table[h * nb + b] = parse(it.value().get<std::string>(), model.behaviors(), model.joint_behaviors());
    seen[h * nb + b] = 1;
  }
  std::vector<std::string> missing;
  for (std::size_t h = 0; h < nh; ++h)
    for (std::size_t b = 0; b < nb; ++b)
      if (!seen[h * nb + b])
        missing.push_back("hypothesis: missing key '" + model.joint_feedback_label(h) + "|" +
                          model.joint_behavior_label(b) + "'");
  if (!missing.empty()) throw ModelError(std::move(missing));
  return Hypothesis(nh, nb, std::move(table), doc.value("name", std::string{}));
}

json hypothesis_to_json(const Hypothesis& f, const McreModel& model) {
  json table = json::object();
  for (std::size_t h = 0; h < f.joint_feedbacks(); ++h)
    for (std::size_t b = 0; b < f.joint_behaviors(); ++b)
      table[model.joint_feedback_label(h) + "|" + model.joint_behavior_label(b)] =
          model.joint_behavior_label(f.predict(h, b));
  return {{"name", f.name()}, {"table", std::move(table)}};
}

HypothesisClass class_from_json(const json& doc, const McreModel& model) {
  if (!doc.is_object() || !doc.contains("hypotheses") || !doc["hypotheses"].is_array())
    throw ModelError("hypothesis class: expected {\"hypotheses\": [...]}");
  std::vector<Hypothesis> members;
  for (const auto& h : doc["hypotheses"]) members.push_back(hypothesis_from_json(h, model));
  return HypothesisClass(std::move(members));
}

json class_to_json(const HypothesisClass& cls, const McreModel& model) {
  json list = json::array();
  for (const auto& f : cls.members()) list.push_back(hypothesis_to_json(f, model));
  return {{"hypotheses", std::move(list)}};
}

}  // namespace mcre
