#include "carol/harness/manifest.hpp"

#include <filesystem>

#include <json.hpp>

#include "carol/error.hpp"
#include "carol/harness/digest.hpp"
#include "carol/harness/results.hpp"

namespace carol::harness {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string render_manifest(const ExperimentManifest& m) {
  json artifacts = json::array();
  for (const Artifact& a : m.artifacts)
    artifacts.push_back({{"kind", a.kind}, {"source", a.source}, {"path", a.path}, {"sha256", a.sha256}});
  json doc = {{"format", "carol-kit manifest v1"},
              {"experiment_id", m.experiment_id},
              {"config", json::parse(m.config)},
              {"sources_sha256", m.sources_sha256},
              {"methods", m.methods},
              {"seeds", m.seeds},
              {"artifacts", artifacts}};
  return doc.dump(2) + "\n";
}

void save_manifest(const std::string& dir, const ExperimentManifest& m) {
  write_file((fs::path(dir) / kManifestFile).string(), render_manifest(m));
}

ExperimentManifest load_manifest(const std::string& dir) {
  const std::string path = (fs::path(dir) / kManifestFile).string();
  if (!fs::exists(path)) throw IoError("no manifest at '" + path + "'; run train-sources first");
  ExperimentManifest m;
  try {
    const json doc = json::parse(read_file(path));
    if (doc.at("format") != "carol-kit manifest v1") throw DataError(path + ": unsupported manifest format");
    m.experiment_id = doc.at("experiment_id").get<std::string>();
    m.config = doc.at("config").dump();
    m.sources_sha256 = doc.at("sources_sha256").get<std::string>();
    m.methods = doc.at("methods").get<std::vector<std::string>>();
    m.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    for (const json& a : doc.at("artifacts"))
      m.artifacts.push_back(Artifact{a.at("kind").get<std::string>(), a.at("source").get<std::string>(),
                                     a.at("path").get<std::string>(), a.at("sha256").get<std::string>()});
  } catch (const json::exception& err) {
    throw DataError(path + ": malformed manifest: " + err.what());
  }
  if (m.seeds.empty()) throw DataError(path + ": seed list is empty");
  for (const Artifact& a : m.artifacts) {
    const std::string file = (fs::path(dir) / a.path).string();
    const std::string actual = file_sha256(file);
    if (actual != a.sha256)
      throw DigestError("artifact '" + file + "' has digest " + actual + " but the manifest records " + a.sha256);
  }
  return m;
}

const Artifact& find_artifact(const ExperimentManifest& m, const std::string& kind, const std::string& source) {
  for (const Artifact& a : m.artifacts)
    if (a.kind == kind && a.source == source) return a;
  throw DataError("manifest has no " + kind + " artifact for source '" + source + "'");
}

}  // namespace carol::harness
