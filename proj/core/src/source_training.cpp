#include "carol/source_training.hpp"

#include <algorithm>
#include <cmath>

#include "carol/envs.hpp"
#include "carol/error.hpp"

namespace carol {

double EpsilonSchedule::at(long episode) const {
  if (decay_episodes <= 0 || episode >= decay_episodes) return end;
  const double frac = static_cast<double>(episode) / static_cast<double>(decay_episodes);
  return start + (end - start) * frac;
}

void EpsilonSchedule::validate() const {
  if (!(0.0 <= end && end <= start && start <= 1.0))
    throw ConfigError("epsilon schedule needs 0 <= epsilon_end <= epsilon_start <= 1");
  if (decay_episodes < 0) throw ConfigError("epsilon decay_episodes must be nonnegative");
}

void TrainConfig::validate() const {
  if (episodes < 0) throw ConfigError("episodes must be nonnegative");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  epsilon.validate();
}

QTable value_iteration(const TaskHandle& task, double gamma, double tol) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  const TabularDynamics dyn = exact_transition_matrix(task);
  const int S = dyn.n_states;
  const int A = dyn.n_actions;
  QTable q = QTable::zeros(S, A, gamma);
  std::vector<double> v(S, 0.0);
  for (long sweep = 0; sweep < 1000000; ++sweep) {
    double residual = 0.0;
    for (int s = 0; s < S; ++s) {
      if (dyn.terminal[s]) continue;
      for (int a = 0; a < A; ++a) {
        double backup = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
          const double p = dyn.prob(a, s, s2);
          if (p == 0.0) continue;
          backup += p * (dyn.entry_reward[s2] + (dyn.terminal[s2] ? 0.0 : gamma * v[s2]));
        }
        residual = std::max(residual, std::abs(backup - q.at(s, a)));
        q.at(s, a) = backup;
      }
    }
    for (int s = 0; s < S; ++s) v[s] = dyn.terminal[s] ? 0.0 : *std::max_element(q.row(s).begin(), q.row(s).end());
    if (residual < tol) return q;
  }
  throw TrainingError("value iteration did not converge", 0);
}

QTable train_q_tabular(const TaskHandle& task, const TrainConfig& cfg) {
  cfg.validate();
  if (task.env_kind() != EnvKind::GridSlip) throw UnsupportedError("tabular Q-learning needs a tabular task");
  const int A = action_count(task.action_spec());
  QTable q = QTable::zeros(task.state_dim(), A, cfg.gamma);
  Rng explore(derive_seed({cfg.seed, 0x9e1ULL}));
  for (long e = 0; e < cfg.episodes; ++e) {
    const double eps = cfg.epsilon.at(e);
    Episode ep(task, derive_seed({cfg.seed, static_cast<std::uint64_t>(e)}));
    while (!ep.done()) {
      const int s = tabular_state(ep.state());
      int a;
      if (eps > 0.0 && explore.uniform() < eps) a = static_cast<int>(explore.index(A));
      else a = argmax_lowest(q.row(s));
      const TransitionSample t = ep.step(a);
      const int s2 = tabular_state(t.next_state);
      const bool terminal = t.done && !t.truncated;
      const double next = terminal ? 0.0 : *std::max_element(q.row(s2).begin(), q.row(s2).end());
      q.at(s, a) += cfg.lr * (t.reward + cfg.gamma * next - q.at(s, a));
    }
    if (!std::isfinite(q.at(0, 0))) throw TrainingError("Q-learning diverged", e);
  }
  return q;
}

TabularPolicy greedy_policy(const QTable& q) {
  TabularPolicy p{std::vector<int>(q.n_states), q.n_actions};
  for (int s = 0; s < q.n_states; ++s) p.actions[s] = argmax_lowest(q.row(s));
  return p;
}

std::uint64_t eval_episode_seed(std::uint64_t seed, int i) {
  return derive_seed({seed, 0xe7a1ULL, static_cast<std::uint64_t>(i)});
}

EvalStats evaluate_actor(const TaskHandle& task, const Actor& actor, int n_episodes, std::uint64_t seed) {
  if (n_episodes <= 0) throw ConfigError("evaluation needs at least one episode");
  std::vector<double> returns(n_episodes);
  for (int i = 0; i < n_episodes; ++i)
    returns[i] = rollout(task, actor, task.episode_cap(), eval_episode_seed(seed, i)).return_undiscounted;
  EvalStats out;
  out.episodes = n_episodes;
  for (double r : returns) out.mean += r;
  out.mean /= n_episodes;
  if (n_episodes > 1) {
    double ss = 0.0;
    for (double r : returns) ss += (r - out.mean) * (r - out.mean);
    out.std = std::sqrt(ss / (n_episodes - 1));
  }
  return out;
}

EvalStats evaluate_knowledge(const TaskHandle& task, const Knowledge& knowledge, int n_episodes, std::uint64_t seed) {
  check_compatible(knowledge.space, task.space());
  return evaluate_actor(task, greedy_knowledge_actor(knowledge), n_episodes, seed);
}

}  // namespace carol
