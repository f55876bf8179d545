#include "mcre/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace mcre {

using nlohmann::json;

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

namespace {

json digests_to_json(const std::vector<FileDigest>& files) {
  json out = json::array();
  for (const auto& f : files) out.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return out;
}

std::vector<FileDigest> digests_from_json(const json& doc) {
  std::vector<FileDigest> out;
  for (const auto& f : doc) out.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

json manifest_to_json(const RunManifest& m) {
  return {{"tool", "mcre_lab"},
          {"version", m.version},
          {"subcommand", m.subcommand},
          {"args", m.args},
          {"config", m.config},
          {"timestamps", {{"started", m.started_at}, {"finished", m.finished_at}}},
          {"inputs", digests_to_json(m.inputs)},
          {"outputs", digests_to_json(m.outputs)}};
}

RunManifest manifest_from_json(const json& doc) {
  RunManifest m;
  m.version = doc.at("version").get<std::string>();
  m.subcommand = doc.at("subcommand").get<std::string>();
  m.args = doc.at("args").get<std::vector<std::string>>();
  m.config = doc.value("config", json::object());
  m.started_at = doc.at("timestamps").at("started").get<std::string>();
  m.finished_at = doc.at("timestamps").at("finished").get<std::string>();
  m.inputs = digests_from_json(doc.at("inputs"));
  m.outputs = digests_from_json(doc.at("outputs"));
  return m;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << manifest_to_json(m).dump(2) << '\n';
}

std::vector<std::string> verify_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {"cannot read manifest '" + path.string() + "'"};
  const RunManifest m = manifest_from_json(json::parse(in));
  std::vector<std::string> problems;
  const auto check = [&](const FileDigest& f, const std::filesystem::path& resolved) {
    if (!std::filesystem::exists(resolved)) {
      problems.push_back("missing file '" + f.path + "'");
      return;
    }
    if (sha256_file(resolved) != f.sha256) problems.push_back("digest mismatch for '" + f.path + "'");
  };
  for (const auto& f : m.inputs) check(f, f.path);
  for (const auto& f : m.outputs) check(f, path.parent_path() / f.path);
  return problems;
}

}  // namespace mcre
