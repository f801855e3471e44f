#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "carol/error.hpp"
#include "carol/harness/commands.hpp"
#include "carol/harness/config.hpp"

namespace {

using carol::harness::ExperimentConfig;
using carol::harness::RunOptions;

int exit_code(carol::ErrorKind kind) {
  switch (kind) {
    case carol::ErrorKind::Config: return 2;
    case carol::ErrorKind::Io: return 3;
    case carol::ErrorKind::Digest: return 4;
    case carol::ErrorKind::Data: return 5;
    default: return 1;
  }
}

int fail(std::string_view kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
      throw carol::ConfigError("--seeds expects a comma-separated list of nonnegative integers, got '" + csv + "'");
    out.push_back(std::stoull(item));
  }
  if (out.empty()) throw carol::ConfigError("--seeds is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"carol: contextual source-knowledge adaptation experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds_csv, method;
  auto add_common = [&](CLI::App* sub, bool with_method) {
    sub->add_option("config,--config", config_path, "experiment config (JSON)");
    sub->add_option("--out", out_dir, "experiment directory (default: out/<experiment_id>)");
    sub->add_option("--seeds", seeds_csv, "comma-separated seed list overriding the config");
    if (with_method)
      sub->add_option("--method", method, "run a single method")
          ->check(CLI::IsMember({"carol", "carol_plus", "pd", "lfs", "sk"}));
  };
  auto* train = app.add_subcommand("train-sources", "train source knowledge and transition models");
  add_common(train, false);
  auto* sim = app.add_subcommand("similarity", "score the target against every source model");
  add_common(sim, false);
  auto* adapt = app.add_subcommand("adapt", "run the configured methods over the seed list");
  add_common(adapt, true);
  auto* report = app.add_subcommand("report", "aggregate run CSVs into median/IQR curves and a summary");
  std::string run_dir;
  report->add_option("run-dir,--out", run_dir, "experiment directory holding runs/");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 64);
  }

  try {
    if (report->parsed()) {
      if (run_dir.empty()) throw carol::ConfigError("report needs a run directory");
      carol::harness::report(run_dir, &std::cout);
      return 0;
    }
    if (config_path.empty()) throw carol::ConfigError("a config file is required (positional or --config)");
    const ExperimentConfig cfg = carol::harness::load_config(config_path);
    RunOptions opts;
    opts.out_dir = out_dir.empty() ? "out/" + cfg.experiment_id : out_dir;
    opts.log = &std::cout;
    if (!seeds_csv.empty()) opts.seeds = parse_seed_list(seeds_csv);
    if (!method.empty()) opts.method = carol::harness::parse_method(method);

    if (train->parsed()) {
      carol::harness::train_sources(cfg, opts);
    } else if (sim->parsed()) {
      carol::harness::similarity(cfg, opts);
    } else {
      const auto s = carol::harness::adapt(cfg, opts);
      std::cout << "runs completed " << s.completed << ", up to date " << s.skipped << '\n';
    }
  } catch (const carol::Error& e) {
    return fail(carol::to_string(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
