#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcre/lifted_chain.hpp"
#include "mcre/model.hpp"

namespace mcre {

// A user who clicks the top-ranked ad when its rank score (bid x quality)
// reaches min_score; no min_score means the user never clicks.
struct ClickPattern {
  std::string label;
  double prob = 0.0;
  std::optional<double> min_score;
};

enum class KpiQuantization {
  ClickOnly,  // {click, no_click}; non-winners see no_click
  WinClick,   // {won_click, won_noclick, lost}
};

/// Toy single-slot sponsored search. Advertisers are ranked by bid x quality
/// (empty quality = all 1; ties to the lower index); the winner's ad is shown to one user per round.
/// Bid adjustment: after a loss (or no click) raise with adjust_prob, after a
/// paid click lower with adjust_prob, after an unclicked win hold. The opposite
/// move always keeps explore_prob so every kernel is irreducible.
struct ScenarioSpec {
  std::size_t advertisers = 2;
  std::vector<double> bid_levels{1.0, 2.0};
  std::vector<double> quality{1.0, 0.9};
  std::vector<ClickPattern> click_patterns{
      {"eager", 0.3, 0.0}, {"picky", 0.4, 1.5}, {"browser", 0.3, std::nullopt}};
  KpiQuantization kpi = KpiQuantization::WinClick;
  double adjust_prob = 0.6;
  double explore_prob = 0.1;
  std::size_t state_cap = kDefaultStateCap;
};

McreModel toy_sponsored_search(const ScenarioSpec& spec);

// Scenario files accept the ScenarioSpec fields plus a free-text "description".
ScenarioSpec scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const ScenarioSpec& spec);

}  // namespace mcre
