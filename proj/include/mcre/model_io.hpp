#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcre/model.hpp"

namespace mcre {

struct ModelValidation {
  std::optional<McreModel> model;
  std::vector<std::string> diagnostics;  // empty iff model is present

  bool ok() const noexcept { return model.has_value(); }
};

// Parses and validates a model document. Never throws on bad content; every
// problem found is reported with its location.
ModelValidation validate_model_json(const nlohmann::json& doc);
ModelValidation validate_model_file(const std::filesystem::path& path);

// Throws ModelError carrying the diagnostics.
McreModel load_model(const std::filesystem::path& path);
McreModel model_from_json(const nlohmann::json& doc);

nlohmann::json model_to_json(const McreModel& model);

std::vector<std::string> split(const std::string& text, char sep);

}  // namespace mcre
