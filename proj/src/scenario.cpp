#include "mcre/scenario.hpp"

#include <charconv>
#include <set>

#include "mcre/error.hpp"

namespace mcre {

using nlohmann::json;

namespace {

std::string bid_label(double bid) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, bid);
  return "bid" + std::string(buf, res.ptr);
}

Matrix adjustment_kernel(std::size_t levels, double up, double down) {
  const auto n = static_cast<Eigen::Index>(levels);
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double stay = 1.0;
    if (i + 1 < n) {
      m(i, i + 1) = up;
      stay -= up;
    }
    if (i > 0) {
      m(i, i - 1) = down;
      stay -= down;
    }
    m(i, i) = stay;
  }
  return m;
}

}  // namespace

McreModel toy_sponsored_search(const ScenarioSpec& spec) {
  std::vector<std::string> problems;
  if (spec.advertisers == 0) problems.push_back("scenario: advertisers must be positive");
  if (spec.bid_levels.empty()) problems.push_back("scenario: at least one bid level required");
  if (!spec.quality.empty() && spec.quality.size() != spec.advertisers)
    problems.push_back("scenario: quality needs one entry per advertiser (or none)");
  if (spec.click_patterns.empty()) problems.push_back("scenario: at least one click pattern required");
  if (spec.adjust_prob < 0 || spec.explore_prob < 0 || spec.adjust_prob + spec.explore_prob >= 1.0)
    problems.push_back("scenario: need adjust_prob, explore_prob >= 0 with adjust_prob + explore_prob < 1");
  if (!problems.empty()) throw ModelError(std::move(problems));

  const std::vector<std::string> feedback_labels =
      spec.kpi == KpiQuantization::ClickOnly
          ? std::vector<std::string>{"click", "no_click"}
          : std::vector<std::string>{"won_click", "won_noclick", "lost"};
  const std::size_t nb = spec.bid_levels.size();
  const JointSpace joint_b(nb, spec.advertisers);
  const JointSpace joint_h(feedback_labels.size(), spec.advertisers);
  const std::size_t nominal = joint_h.size() * joint_b.size() * joint_b.size();
  if (nominal > spec.state_cap)
    throw ModelError("scenario: " + std::to_string(nominal) + " lifted states exceed the cap of " +
                     std::to_string(spec.state_cap));

  std::vector<std::string> behavior_labels;
  for (double bid : spec.bid_levels) behavior_labels.push_back(bid_label(bid));

  UserFactorModel users;
  for (const auto& p : spec.click_patterns) {
    users.labels.push_back(p.label);
    users.probs.push_back(p.prob);
  }

  std::vector<std::size_t> table;
  table.reserve(users.labels.size() * joint_b.size());
  for (const auto& pattern : spec.click_patterns) {
    for (std::size_t m = 0; m < joint_b.size(); ++m) {
      std::size_t winner = 0;
      double best = -1.0;
      for (std::size_t a = 0; a < spec.advertisers; ++a) {
        const double q = spec.quality.empty() ? 1.0 : spec.quality[a];
        const double score = spec.bid_levels[joint_b.digit(m, a)] * q;
        if (score > best) {
          best = score;
          winner = a;
        }
      }
      const bool clicked = pattern.min_score.has_value() && best >= *pattern.min_score;
      std::vector<std::size_t> feedback(spec.advertisers);
      for (std::size_t a = 0; a < spec.advertisers; ++a) {
        if (spec.kpi == KpiQuantization::ClickOnly)
          feedback[a] = (a == winner && clicked) ? 0 : 1;
        else
          feedback[a] = a != winner ? 2 : (clicked ? 0 : 1);
      }
      table.push_back(joint_h.encode(feedback));
    }
  }

  const double adj = spec.adjust_prob;
  const double exp = spec.explore_prob;
  const Matrix raise = adjustment_kernel(nb, adj, exp);
  const Matrix lower = adjustment_kernel(nb, exp, adj);
  const Matrix hold = adjustment_kernel(nb, exp, exp);
  std::vector<Matrix> per_feedback =
      spec.kpi == KpiQuantization::ClickOnly ? std::vector<Matrix>{lower, raise}
                                             : std::vector<Matrix>{lower, hold, raise};
  std::vector<std::vector<Matrix>> kernels(spec.advertisers, per_feedback);

  FeedbackFunction fn(users.labels.size(), joint_b.size(), std::move(table));
  return McreModel(BehaviorSpace(std::move(behavior_labels)), FeedbackSpace(feedback_labels),
                   std::move(users), std::move(fn), AgentKernelSet(std::move(kernels)));
}

ScenarioSpec scenario_from_json(const json& doc) {
  static const std::set<std::string> kKeys = {"advertisers", "bid_levels",  "quality",
                                              "click_patterns", "kpi",     "adjust_prob",
                                              "explore_prob",   "state_cap", "description"};
  if (!doc.is_object()) throw ConfigError("scenario: expected a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!kKeys.contains(it.key())) throw ConfigError("scenario: unknown key '" + it.key() + "'");
  ScenarioSpec spec;
  try {
    if (doc.contains("advertisers")) spec.advertisers = doc["advertisers"].get<std::size_t>();
    if (doc.contains("bid_levels")) spec.bid_levels = doc["bid_levels"].get<std::vector<double>>();
    if (doc.contains("quality")) {
      spec.quality = doc["quality"].get<std::vector<double>>();
    } else {
      spec.quality.clear();
    }
    if (doc.contains("click_patterns")) {
      spec.click_patterns.clear();
      for (const auto& p : doc["click_patterns"]) {
        for (auto it = p.begin(); it != p.end(); ++it)
          if (it.key() != "label" && it.key() != "prob" && it.key() != "min_score")
            throw ConfigError("scenario: unknown click pattern key '" + it.key() + "'");
        ClickPattern cp{p.at("label").get<std::string>(), p.at("prob").get<double>(), std::nullopt};
        if (p.contains("min_score") && !p["min_score"].is_null()) cp.min_score = p["min_score"].get<double>();
        spec.click_patterns.push_back(std::move(cp));
      }
    }
    if (doc.contains("kpi")) {
      const auto kpi = doc["kpi"].get<std::string>();
      if (kpi == "click_only") spec.kpi = KpiQuantization::ClickOnly;
      else if (kpi == "win_click") spec.kpi = KpiQuantization::WinClick;
      else throw ConfigError("scenario: kpi must be 'click_only' or 'win_click'");
    }
    if (doc.contains("adjust_prob")) spec.adjust_prob = doc["adjust_prob"].get<double>();
    if (doc.contains("explore_prob")) spec.explore_prob = doc["explore_prob"].get<double>();
    if (doc.contains("state_cap")) spec.state_cap = doc["state_cap"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return spec;
}

json scenario_to_json(const ScenarioSpec& spec) {
  json patterns = json::array();
  for (const auto& p : spec.click_patterns)
    patterns.push_back({{"label", p.label},
                        {"prob", p.prob},
                        {"min_score", p.min_score ? json(*p.min_score) : json(nullptr)}});
  return {{"advertisers", spec.advertisers},
          {"bid_levels", spec.bid_levels},
          {"quality", spec.quality},
          {"click_patterns", std::move(patterns)},
          {"kpi", spec.kpi == KpiQuantization::ClickOnly ? "click_only" : "win_click"},
          {"adjust_prob", spec.adjust_prob},
          {"explore_prob", spec.explore_prob},
          {"state_cap", spec.state_cap}};
}

}  // namespace mcre
