#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "carol/env_specs.hpp"

namespace carol {

enum class EnvKind { GridSlip, FrictionCar, WindyLander };

std::string_view to_string(EnvKind kind);
EnvKind env_kind_from_string(std::string_view name);

struct DiscreteActions {
  int n = 0;
  bool operator==(const DiscreteActions&) const = default;
};

struct BoxActions {
  std::vector<double> lo;
  std::vector<double> hi;
  bool clamps = false;  // out-of-box actions are clamped instead of rejected
  bool operator==(const BoxActions&) const = default;
};

using ActionSpec = std::variant<DiscreteActions, BoxActions>;

void validate(const ActionSpec& spec);
bool is_discrete(const ActionSpec& spec);
int action_count(const ActionSpec& spec);  // discrete only
/// Width of the encoded action (one-hot width for discrete actions).
int action_width(const ActionSpec& spec);

using State = std::vector<double>;
using Action = std::variant<int, std::vector<double>>;

/// One-hot for discrete actions, the raw vector for continuous ones.
std::vector<double> encode_action(const ActionSpec& spec, const Action& action);
void append_encoded_action(const ActionSpec& spec, const Action& action, std::vector<double>& out);

struct TransitionSample {
  State state;
  Action action;  // as executed by the environment (after any clamping)
  double reward = 0.0;
  State next_state;
  bool done = false;
  bool truncated = false;  // done only because the episode cap was reached
};

struct Trajectory {
  std::vector<TransitionSample> samples;
  double return_undiscounted = 0.0;

  void push(TransitionSample sample) {
    return_undiscounted += sample.reward;
    samples.push_back(std::move(sample));
  }
  std::size_t size() const { return samples.size(); }
};

/// State/action description every piece of knowledge is tied to.
struct SpaceSpec {
  EnvKind env = EnvKind::GridSlip;
  int state_dim = 0;
  ActionSpec action;
  bool operator==(const SpaceSpec&) const = default;
};

using EnvSpec = std::variant<GridSlipSpec, FrictionCarSpec, WindyLanderSpec>;

/// Names of the context parameters of an environment kind.
std::vector<std::string> context_param_names(EnvKind kind);

/// Returns base with its context parameters replaced by params. Every name
/// required by the environment must be present and no others.
EnvSpec with_context(EnvSpec base, const std::map<std::string, double>& params);

/// Immutable, validated description of one MDP instance.
class TaskHandle {
 public:
  TaskHandle(EnvSpec spec, std::uint64_t seed, int episode_cap);

  EnvKind env_kind() const;
  const EnvSpec& spec() const { return spec_; }
  std::map<std::string, double> context_params() const;
  std::uint64_t seed() const { return seed_; }
  int episode_cap() const { return episode_cap_; }

  int state_dim() const { return space_.state_dim; }
  const ActionSpec& action_spec() const { return space_.action; }
  const SpaceSpec& space() const { return space_; }

  template <typename Spec>
  const Spec& as() const { return std::get<Spec>(spec_); }

  bool operator==(const TaskHandle& other) const {
    return spec_ == other.spec_ && seed_ == other.seed_ && episode_cap_ == other.episode_cap_;
  }

 private:
  EnvSpec spec_;
  std::uint64_t seed_;
  int episode_cap_;
  SpaceSpec space_;
};

}  // namespace carol
