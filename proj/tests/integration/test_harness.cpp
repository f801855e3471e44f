#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "carol/carol.hpp"
#include "carol/harness/config.hpp"
#include "carol/harness/digest.hpp"
#include "carol/harness/manifest.hpp"
#include "carol/harness/results.hpp"
#include "carol/harness/commands.hpp"

using namespace carol;
using namespace carol::harness;
namespace fs = std::filesystem;

namespace {

nlohmann::json tiny() {
  std::ifstream in(std::string(CAROL_TEST_DATA) + "/tiny_policy.json");
  return nlohmann::json::parse(in);
}

std::string config_error(const nlohmann::json& doc) {
  try {
    parse_config(doc.dump());
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("carol_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(tiny().dump());
  CHECK(cfg.experiment_id == "tiny_policy");
  REQUIRE(cfg.sources.size() == 3);
  CHECK(std::get<GridSlipSpec>(cfg.sources[1].env.spec).slip_p == 0.3);
  CHECK(std::get<GridSlipSpec>(cfg.sources[1].env.spec).pits.size() == 1);
  CHECK(cfg.knowledge.as_policy);
  CHECK(cfg.adapt.iterations == 3);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(cfg.methods.size() == 4);
  CHECK(parse_config(tiny().dump()).canonical == cfg.canonical);
}

TEST_CASE("config errors name the field") {
  auto doc = tiny();
  doc["adapt"]["iterationz"] = 3;
  CHECK(config_error(doc).find("unknown field 'adapt.iterationz'") != std::string::npos);

  doc = tiny();
  doc.erase("seeds");
  CHECK(config_error(doc).find("missing field 'seeds'") != std::string::npos);

  doc = tiny();
  doc["sources"][0]["env"].erase("slip_p");
  CHECK(config_error(doc).find("slip_p") != std::string::npos);

  doc = tiny();
  doc["adapt"]["lr"] = "fast";
  CHECK(config_error(doc).find("adapt.lr") != std::string::npos);

  doc = tiny();
  doc["methods"] = {"carol", "maml"};
  CHECK(!config_error(doc).empty());

  doc = tiny();
  doc["knowledge"]["trainer"] = "policy_gradient";
  CHECK(config_error(doc).find("knowledge.as_policy") != std::string::npos);

  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.0, -1.5, 0.1, 1.0 / 3.0, 1e-300, 12345678.9}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(12.0) == "12");
}

TEST_CASE("result tables") {
  const fs::path dir = scratch_dir("tables");
  LearningCurve curve{{0, 0, -3.5, 0.25}, {1, 8, 1.0 / 3.0, 0.0}};
  const std::string path = (dir / "nested" / "curve.csv").string();
  write_curve_csv(path, curve);
  const std::string text = read_file(path);
  CHECK(text.rfind(std::string(kResultsHeader) + "\n" + std::string(kCurveColumns) + "\n", 0) == 0);
  CHECK(text.find("0,0,-3.5,0.25\n") != std::string::npos);
  CHECK(read_curve_csv(path) == curve);

  write_file((dir / "bad.csv").string(), "a,b\n1,2\n");
  CHECK_THROWS_AS(read_table((dir / "bad.csv").string()), DataError);
  write_file((dir / "ragged.csv").string(), std::string(kResultsHeader) + "\na,b\n1\n");
  CHECK_THROWS_AS(read_table((dir / "ragged.csv").string()), DataError);
  CHECK_THROWS_AS(read_file((dir / "missing.csv").string()), IoError);
  fs::remove_all(dir);
}

TEST_CASE("quartiles") {
  const Quartiles q = quartiles({4.0, 1.0, 3.0, 2.0});
  CHECK(q.q25 == 1.75);
  CHECK(q.median == 2.5);
  CHECK(q.q75 == 3.25);
  const Quartiles one = quartiles({7.0});
  CHECK(one.q25 == 7.0);
  CHECK(one.median == 7.0);
  CHECK(one.q75 == 7.0);
  CHECK(quartiles({1.0, 2.0, 10.0}).median == 2.0);
}

TEST_CASE("digests") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("manifest integrity") {
  const fs::path dir = scratch_dir("manifest");
  write_file((dir / "sources" / "a.knw").string(), "payload");
  ExperimentManifest m;
  m.experiment_id = "x";
  m.config = "{}";
  m.sources_sha256 = sha256_hex("{}");
  m.methods = {"carol"};
  m.seeds = {0, 1};
  m.artifacts = {{"knowledge", "a", "sources/a.knw", sha256_hex("payload")}};
  save_manifest(dir.string(), m);
  CHECK(load_manifest(dir.string()) == m);
  CHECK(find_artifact(m, "knowledge", "a").path == "sources/a.knw");

  write_file((dir / "sources" / "a.knw").string(), "tampered");
  CHECK_THROWS_AS(load_manifest(dir.string()), DigestError);

  write_file((dir / "sources" / "a.knw").string(), "payload");
  m.seeds.clear();
  save_manifest(dir.string(), m);
  CHECK_THROWS(load_manifest(dir.string()));
  fs::remove_all(dir);
}

TEST_CASE("as_policy keeps the greedy table policy") {
  const ExperimentConfig cfg = parse_config(tiny().dump());
  KnowledgeConfig k = cfg.knowledge;
  k.trainer = SourceTrainer::ValueIteration;
  const Knowledge policy = train_source(cfg.sources[0], k, 0);
  const TaskHandle task = cfg.sources[0].env.make();
  const QTable q = value_iteration(task, k.q.gamma);
  CHECK(std::get<PolicyK>(policy.body).policy == Policy{greedy_policy(q)});
  k.as_policy = false;
  CHECK(std::get<ValueK>(train_source(cfg.sources[0], k, 0).body).q == QFunction{q});
}
