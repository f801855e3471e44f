#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "carol/rng.hpp"
#include "carol/task.hpp"

namespace carol {

struct StepResult {
  State next_state;
  double reward = 0.0;
  bool done = false;
};

/// Seed of the per-episode environment stream.
std::uint64_t episode_env_seed(const TaskHandle& task, std::uint64_t episode_seed);
/// Seed of the per-episode actor stream (kept apart from the environment's).
std::uint64_t episode_actor_seed(const TaskHandle& task, std::uint64_t episode_seed);

/// Deterministic initial state for (task, episode_seed).
State env_reset(const TaskHandle& task, std::uint64_t episode_seed);

/// One transition drawn with the caller's per-episode stream. Does not
/// apply the episode cap; Episode does.
StepResult env_step(const TaskHandle& task, std::span<const double> state, const Action& action, Rng& rng);

/// Rollout context: owns the per-episode state and RNG. Keeps a reference
/// to the task, which must outlive it.
class Episode {
 public:
  Episode(const TaskHandle& task, std::uint64_t episode_seed);

  const State& state() const { return state_; }
  bool done() const { return done_; }
  int steps() const { return steps_; }

  /// Advances one step; done is also raised at the task's episode cap.
  /// The returned sample records the action as executed.
  TransitionSample step(const Action& action);

 private:
  const TaskHandle* task_;
  Rng rng_;
  State state_;
  int steps_ = 0;
  bool done_ = false;
};

/// Maps a state to an action; the Rng is the episode's actor stream.
using Actor = std::function<Action(std::span<const double> state, Rng& rng)>;

Actor uniform_random_actor(const ActionSpec& spec);

/// Runs one episode of at most max_steps (and the task cap) steps.
Trajectory rollout(const TaskHandle& task, const Actor& actor, int max_steps, std::uint64_t episode_seed);

/// Action the environment actually executes (clamped, or validated).
Action executed_action(const TaskHandle& task, const Action& action);

}  // namespace carol
