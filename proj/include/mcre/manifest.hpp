#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace mcre {

std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string path;
  std::string sha256;
};

/// Everything needed to rerun a CLI invocation. Only `started_at` and
/// `finished_at` vary between identical runs.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> args;  // effective arguments after config-file merge
  nlohmann::json config = nlohmann::json::object();
  std::string version;
  std::string started_at;
  std::string finished_at;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;  // paths relative to the manifest's directory
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& doc);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

/// Recomputes every recorded digest; returns one message per mismatch or
/// missing file (empty when the manifest checks out).
std::vector<std::string> verify_manifest(const std::filesystem::path& path);

std::string utc_timestamp();

}  // namespace mcre
