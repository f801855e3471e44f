#include "carol/rollout.hpp"

#include <algorithm>

namespace carol {

Actor uniform_random_actor(const ActionSpec& spec) {
  validate(spec);
  if (const auto* d = std::get_if<DiscreteActions>(&spec)) {
    const int n = d->n;
    return [n](std::span<const double>, Rng& rng) -> Action { return static_cast<int>(rng.index(n)); };
  }
  const auto box = std::get<BoxActions>(spec);
  return [box](std::span<const double>, Rng& rng) -> Action {
    std::vector<double> a(box.lo.size());
    for (std::size_t d = 0; d < a.size(); ++d) a[d] = rng.uniform(box.lo[d], box.hi[d]);
    return a;
  };
}

Trajectory rollout(const TaskHandle& task, const Actor& actor, int max_steps, std::uint64_t episode_seed) {
  Episode episode(task, episode_seed);
  Rng actor_rng(episode_actor_seed(task, episode_seed));
  Trajectory traj;
  while (!episode.done() && episode.steps() < max_steps) traj.push(episode.step(actor(episode.state(), actor_rng)));
  return traj;
}

}  // namespace carol
