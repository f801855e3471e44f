#pragma once

#include <cstdint>

#include "carol/knowledge.hpp"
#include "carol/task.hpp"

namespace carol {

/// Linear decay from start to end over decay_episodes, then flat.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  long decay_episodes = 1000;

  double at(long episode) const;
  void validate() const;
  bool operator==(const EpsilonSchedule&) const = default;
};

struct TrainConfig {
  long episodes = 1000;
  double lr = 0.1;
  double gamma = 0.99;
  EpsilonSchedule epsilon;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Q* from the exact transition law; sup-norm Bellman residual below tol.
QTable value_iteration(const TaskHandle& task, double gamma, double tol = 1e-10);

/// Epsilon-greedy one-step Q-learning from a zero table.
QTable train_q_tabular(const TaskHandle& task, const TrainConfig& cfg);

TabularPolicy greedy_policy(const QTable& q);

struct EvalStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single episode
  int episodes = 0;
};

/// Seeds of evaluation episode i are a function of (seed, i) only, so every
/// method evaluated with the same seed faces the same environment draws.
std::uint64_t eval_episode_seed(std::uint64_t seed, int i);

EvalStats evaluate_actor(const TaskHandle& task, const Actor& actor, int n_episodes, std::uint64_t seed);
/// Greedy rollouts of the knowledge; throws DomainError on spec mismatch.
EvalStats evaluate_knowledge(const TaskHandle& task, const Knowledge& knowledge, int n_episodes, std::uint64_t seed);

struct PolicyGradientConfig {
  long episodes = 2000;
  int episodes_per_update = 8;
  double actor_lr = 1e-3;
  double value_lr = 1e-3;
  double critic_lr = 1e-3;
  double gamma = 0.99;
  int eval_episodes = 50;
  double success_threshold = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PolicyGradientResult {
  NetworkPolicy policy;
  NetworkQ critic;
  EvalStats evaluation;
  bool passed = false;  // evaluation.mean > success_threshold
  double critic_td_residual = 0.0;  // mean squared 1-step TD error on the last batch
};

/// Advantage actor-critic: Monte-Carlo advantages against a learned state
/// value baseline, plus a Q critic fitted by 1-step TD on the same stream.
PolicyGradientResult train_policy_gradient(const TaskHandle& task, const NetConfig& actor_cfg,
                                           const NetConfig& critic_cfg, const PolicyGradientConfig& cfg);

}  // namespace carol
