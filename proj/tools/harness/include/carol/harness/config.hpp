#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "carol/adaptation.hpp"
#include "carol/context.hpp"
#include "carol/env_specs.hpp"
#include "carol/source_training.hpp"
#include "carol/task.hpp"

namespace carol::harness {

struct EnvConfig {
  std::variant<GridSlipSpec, FrictionCarSpec, WindyLanderSpec> spec;
  int episode_cap = 100;
  std::uint64_t seed = 0;

  TaskHandle make() const;
};

struct SourceConfig {
  std::string name;
  EnvConfig env;
};

enum class SourceTrainer { ValueIteration, QLearning, PolicyGradient, ActorCritic };

struct KnowledgeConfig {
  SourceTrainer trainer = SourceTrainer::QLearning;
  TrainConfig q;
  PolicyGradientConfig pg;
  NetConfig actor{{64, 64}, Activation::Tanh, 0};
  NetConfig critic{{64, 64}, Activation::ReLU, 0};
  bool as_policy = false;  // tabular trainers: keep the greedy policy of the table
};

struct ContextConfig {
  std::size_t m_g = 2000;
  FitConfig fit;
  NormalizationMode normalization;
  std::uint64_t seed = 0;
};

enum class Method { Carol, CarolPlus, Pd, Lfs, Sk };

std::string_view method_name(Method m);
/// Throws ConfigError for names outside {carol, carol_plus, pd, lfs, sk}.
Method parse_method(std::string_view name);

struct StudentConfig {
  NetConfig policy{{64, 64}, Activation::Tanh, 0};
  QModelConfig q;
};

struct ExperimentConfig {
  std::string experiment_id;
  std::vector<SourceConfig> sources;
  EnvConfig target;
  KnowledgeConfig knowledge;
  ContextConfig context;
  AdaptConfig adapt;
  StudentConfig student;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> weights_file;  // absolute after load_config
  int sk_episodes = 20;
  std::string canonical;          // normalised JSON of the whole document
  std::string sources_canonical;  // normalised JSON of what train-sources consumes
};

/// Parses a JSON config. Unknown keys, missing required fields and values of
/// the wrong type raise ConfigError naming the dotted field path.
ExperimentConfig parse_config(std::string_view text);
/// parse_config on a file; relative weights_file paths resolve against the
/// config's directory.
ExperimentConfig load_config(const std::string& path);

/// Reads {"weights": [...]} as written for weight overrides.
std::vector<double> load_weights_file(const std::string& path);

}  // namespace carol::harness
