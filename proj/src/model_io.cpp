#include "mcre/model_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mcre/error.hpp"

namespace mcre {

using nlohmann::json;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

namespace {

const std::set<std::string> kRootKeys = {"agents",         "behavior_labels", "feedback_labels",
                                         "user_factors",   "feedback_table",  "kernels"};

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where, std::vector<std::string>& diag) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.contains(it.key())) diag.push_back(where + ": unknown key '" + it.key() + "'");
}

std::optional<std::vector<std::string>> string_list(const json& doc, const std::string& key,
                                                    std::vector<std::string>& diag) {
  if (!doc.contains(key)) {
    diag.push_back("missing key '" + key + "'");
    return std::nullopt;
  }
  const json& v = doc.at(key);
  if (!v.is_array()) {
    diag.push_back(key + ": expected an array of strings");
    return std::nullopt;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) {
      diag.push_back(key + "[" + std::to_string(i) + "]: expected a string");
      return std::nullopt;
    }
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

// Maps "l1,l2,...,lN" to a joint index; reports unknown labels or wrong arity.
std::optional<std::size_t> parse_joint(const std::string& text, const std::vector<std::string>& labels,
                                       const JointSpace& space, const std::string& where,
                                       std::vector<std::string>& diag) {
  const auto parts = split(text, ',');
  if (parts.size() != space.agents()) {
    diag.push_back(where + ": '" + text + "' has " + std::to_string(parts.size()) +
                   " components, expected " + std::to_string(space.agents()));
    return std::nullopt;
  }
  std::vector<std::size_t> digits;
  for (const auto& p : parts) {
    std::size_t i = 0;
    while (i < labels.size() && labels[i] != p) ++i;
    if (i == labels.size()) {
      diag.push_back(where + ": unknown label '" + p + "'");
      return std::nullopt;
    }
    digits.push_back(i);
  }
  return space.encode(digits);
}

std::string joint_key(const std::vector<std::size_t>& digits, const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) out += (i ? "," : "") + labels[digits[i]];
  return out;
}

}  // namespace

ModelValidation validate_model_json(const json& doc) {
  std::vector<std::string> diag;
  ModelValidation result;
  if (!doc.is_object()) {
    result.diagnostics.push_back("model document must be a JSON object");
    return result;
  }
  reject_unknown_keys(doc, kRootKeys, "model", diag);

  std::size_t agents = 0;
  if (!doc.contains("agents")) {
    diag.push_back("missing key 'agents'");
  } else if (!doc["agents"].is_number_unsigned() || doc["agents"].get<std::size_t>() == 0) {
    diag.push_back("agents: expected a positive integer");
  } else {
    agents = doc["agents"].get<std::size_t>();
  }
  const auto behavior_labels = string_list(doc, "behavior_labels", diag);
  const auto feedback_labels = string_list(doc, "feedback_labels", diag);

  UserFactorModel users;
  bool users_ok = false;
  if (!doc.contains("user_factors") || !doc["user_factors"].is_object()) {
    diag.push_back("user_factors: expected an object with 'labels' and 'probs'");
  } else {
    const json& uf = doc["user_factors"];
    reject_unknown_keys(uf, {"labels", "probs"}, "user_factors", diag);
    const auto labels = string_list(uf, "labels", diag);
    if (!uf.contains("probs") || !uf["probs"].is_array()) {
      diag.push_back("user_factors: missing 'probs' array");
    } else if (labels) {
      users.labels = *labels;
      users_ok = true;
      for (std::size_t i = 0; i < uf["probs"].size(); ++i) {
        if (!uf["probs"][i].is_number()) {
          diag.push_back("user_factors.probs[" + std::to_string(i) + "]: expected a number");
          users_ok = false;
        } else {
          users.probs.push_back(uf["probs"][i].get<double>());
        }
      }
    }
  }

  if (!agents || !behavior_labels || !feedback_labels || !users_ok || behavior_labels->empty() ||
      feedback_labels->empty()) {
    if (behavior_labels && behavior_labels->empty()) diag.push_back("behavior_labels: empty");
    if (feedback_labels && feedback_labels->empty()) diag.push_back("feedback_labels: empty");
    result.diagnostics = std::move(diag);
    return result;
  }

  const JointSpace joint_b(behavior_labels->size(), agents);
  const JointSpace joint_h(feedback_labels->size(), agents);

  // Feedback table: every (u, m) key must be present exactly once.
  std::vector<std::size_t> table(users.labels.size() * joint_b.size(), 0);
  if (!doc.contains("feedback_table") || !doc["feedback_table"].is_object()) {
    diag.push_back("feedback_table: expected an object mapping 'u|b1,...,bN' to 'h1,...,hN'");
  } else {
    std::vector<bool> seen(table.size(), false);
    for (auto it = doc["feedback_table"].begin(); it != doc["feedback_table"].end(); ++it) {
      const std::string where = "feedback_table['" + it.key() + "']";
      const auto bar = it.key().find('|');
      if (bar == std::string::npos) {
        diag.push_back(where + ": key must have the form 'u|b1,...,bN'");
        continue;
      }
      const std::string user = it.key().substr(0, bar);
      std::size_t u = 0;
      while (u < users.labels.size() && users.labels[u] != user) ++u;
      if (u == users.labels.size()) {
        diag.push_back(where + ": unknown user factor '" + user + "'");
        continue;
      }
      const auto m = parse_joint(it.key().substr(bar + 1), *behavior_labels, joint_b, where, diag);
      if (!it.value().is_string()) {
        diag.push_back(where + ": value must be a string 'h1,...,hN'");
        continue;
      }
      const auto k = parse_joint(it.value().get<std::string>(), *feedback_labels, joint_h, where, diag);
      if (!m || !k) continue;
      table[u * joint_b.size() + *m] = *k;
      seen[u * joint_b.size() + *m] = true;
    }
    for (std::size_t u = 0; u < users.labels.size(); ++u)
      for (std::size_t m = 0; m < joint_b.size(); ++m)
        if (!seen[u * joint_b.size() + m])
          diag.push_back("feedback_table: missing key '" + users.labels[u] + "|" +
                         joint_key(joint_b.decode(m), *behavior_labels) + "'");
  }

  // Kernels: per agent, an object keyed by feedback label holding a row-major matrix.
  std::vector<std::vector<Matrix>> kernels;
  const auto nb = static_cast<Eigen::Index>(behavior_labels->size());
  if (!doc.contains("kernels") || !doc["kernels"].is_array()) {
    diag.push_back("kernels: expected an array with one object per agent");
  } else if (doc["kernels"].size() != agents) {
    diag.push_back("kernels: " + std::to_string(doc["kernels"].size()) + " entries, expected " +
                   std::to_string(agents) + " (one per agent)");
  } else {
    for (std::size_t a = 0; a < agents; ++a) {
      const json& per_agent = doc["kernels"][a];
      const std::string agent_where = "kernels[" + std::to_string(a) + "]";
      if (!per_agent.is_object()) {
        diag.push_back(agent_where + ": expected an object keyed by feedback label");
        continue;
      }
      reject_unknown_keys(per_agent,
                          std::set<std::string>(feedback_labels->begin(), feedback_labels->end()),
                          agent_where, diag);
      std::vector<Matrix> agent_kernels;
      for (const auto& label : *feedback_labels) {
        const std::string where = "kernel agent " + std::to_string(a) + " feedback '" + label + "'";
        Matrix m = Matrix::Zero(nb, nb);
        if (!per_agent.contains(label)) {
          diag.push_back(where + ": missing");
        } else if (const json& rows = per_agent[label];
                   !rows.is_array() || rows.size() != behavior_labels->size()) {
          diag.push_back(where + ": expected " + std::to_string(nb) + " rows");
        } else {
          for (Eigen::Index r = 0; r < nb; ++r) {
            const json& row = rows[static_cast<std::size_t>(r)];
            if (!row.is_array() || row.size() != behavior_labels->size()) {
              diag.push_back(where + " row " + std::to_string(r) + ": expected " +
                             std::to_string(nb) + " numbers");
              continue;
            }
            bool numeric = true;
            for (Eigen::Index c = 0; c < nb; ++c) {
              const json& v = row[static_cast<std::size_t>(c)];
              if (!v.is_number()) {
                numeric = false;
                continue;
              }
              m(r, c) = v.get<double>();
            }
            if (!numeric) {
              diag.push_back(where + " row " + std::to_string(r) + ": non-numeric entry");
              continue;
            }
            if ((m.row(r).array() < 0.0).any())
              diag.push_back(where + " row " + std::to_string(r) + ": negative entry");
            const double sum = m.row(r).sum();
            if (std::abs(sum - 1.0) > kInputTolerance) {
              std::ostringstream os;
              os.precision(17);
              os << where << " row " << r << ": sums to " << sum << ", expected 1";
              diag.push_back(os.str());
            }
          }
        }
        agent_kernels.push_back(std::move(m));
      }
      kernels.push_back(std::move(agent_kernels));
    }
  }

  if (!diag.empty()) {
    result.diagnostics = std::move(diag);
    return result;
  }
  try {
    FeedbackFunction feedback_fn(users.labels.size(), joint_b.size(), std::move(table));
    result.model.emplace(BehaviorSpace(*behavior_labels), FeedbackSpace(*feedback_labels),
                         std::move(users), std::move(feedback_fn), AgentKernelSet(std::move(kernels)));
  } catch (const ModelError& e) {
    result.diagnostics = e.violations();
  }
  return result;
}

ModelValidation validate_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ModelValidation r;
    r.diagnostics.push_back("cannot open model file '" + path.string() + "'");
    return r;
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    ModelValidation r;
    r.diagnostics.push_back("malformed JSON in '" + path.string() + "': " + e.what());
    return r;
  }
  return validate_model_json(doc);
}

McreModel model_from_json(const json& doc) {
  auto v = validate_model_json(doc);
  if (!v.ok()) throw ModelError(std::move(v.diagnostics));
  return std::move(*v.model);
}

McreModel load_model(const std::filesystem::path& path) {
  auto v = validate_model_file(path);
  if (!v.ok()) throw ModelError(std::move(v.diagnostics));
  return std::move(*v.model);
}

json model_to_json(const McreModel& model) {
  json doc;
  doc["agents"] = model.agents();
  doc["behavior_labels"] = model.behaviors().labels();
  doc["feedback_labels"] = model.feedbacks().labels();
  doc["user_factors"] = {{"labels", model.users().labels}, {"probs", model.users().probs}};
  json table = json::object();
  for (std::size_t u = 0; u < model.users().labels.size(); ++u)
    for (std::size_t m = 0; m < model.joint_behaviors().size(); ++m)
      table[model.users().labels[u] + "|" + model.joint_behavior_label(m)] =
          model.joint_feedback_label(model.feedback_fn()(u, m));
  doc["feedback_table"] = std::move(table);
  json kernels = json::array();
  for (std::size_t a = 0; a < model.agents(); ++a) {
    json per_agent = json::object();
    for (std::size_t k = 0; k < model.feedbacks().size(); ++k) {
      const Matrix& m = model.kernels().kernel(a, k);
      json rows = json::array();
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
      }
      per_agent[model.feedbacks().label(k)] = std::move(rows);
    }
    kernels.push_back(std::move(per_agent));
  }
  doc["kernels"] = std::move(kernels);
  return doc;
}

}  // namespace mcre
