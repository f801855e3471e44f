#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace carol::harness {

inline constexpr const char* kManifestFile = "manifest.json";

struct Artifact {
  std::string kind;    // "knowledge" or "transition_model"
  std::string source;  // source name
  std::string path;    // relative to the experiment directory
  std::string sha256;
  bool operator==(const Artifact&) const = default;
};

struct ExperimentManifest {
  std::string experiment_id;
  std::string config;          // normalised JSON of the full config
  std::string sources_sha256;  // digest of the part train-sources depends on
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<Artifact> artifacts;
  bool operator==(const ExperimentManifest&) const = default;
};

std::string render_manifest(const ExperimentManifest& m);
void save_manifest(const std::string& dir, const ExperimentManifest& m);
/// Parses dir/manifest.json and checks every artifact against its digest
/// (DigestError on mismatch) and that the seed list is nonempty.
ExperimentManifest load_manifest(const std::string& dir);

const Artifact& find_artifact(const ExperimentManifest& m, const std::string& kind, const std::string& source);

}  // namespace carol::harness
