#include <algorithm>
#include <cmath>

#include "carol/error.hpp"
#include "carol/source_training.hpp"

namespace carol {

void PolicyGradientConfig::validate() const {
  if (episodes < 0) throw ConfigError("episodes must be nonnegative");
  if (episodes_per_update <= 0) throw ConfigError("episodes_per_update must be positive");
  if (!(actor_lr > 0.0 && value_lr > 0.0 && critic_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (eval_episodes <= 0) throw ConfigError("eval_episodes must be positive");
}

namespace {

struct Step {
  TransitionSample sample;
  Action sampled;  // pre-clamping action, used for log-probabilities
  double ret = 0.0;
};

// Value the critic bootstraps from: Q at the policy's mean action, or the
// policy-weighted average over discrete actions.
double policy_q(const NetworkPolicy& policy, const NetworkQ& critic, const ActionSpec& actions,
                std::span<const double> state) {
  if (policy.family == PolicyFamily::DiagonalGaussian)
    return q_value(critic, actions, state, gaussian_params(policy, state).mean);
  const std::vector<double> p = action_probabilities(policy, state);
  const std::vector<double> q = q_values(critic, actions, state);
  double v = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) v += p[a] * q[a];
  return v;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

PolicyGradientResult train_policy_gradient(const TaskHandle& task, const NetConfig& actor_cfg,
                                           const NetConfig& critic_cfg, const PolicyGradientConfig& cfg) {
  cfg.validate();
  const SpaceSpec& space = task.space();
  PolicyGradientResult result;
  result.policy = make_policy_net(space, actor_cfg);
  result.critic = make_q_net(space, critic_cfg);
  std::vector<int> value_sizes{space.state_dim};
  value_sizes.insert(value_sizes.end(), critic_cfg.hidden.begin(), critic_cfg.hidden.end());
  value_sizes.push_back(1);
  Mlp value = mlp_init(value_sizes, std::vector<Activation>(critic_cfg.hidden.size(), critic_cfg.activation),
                       Activation::Identity, derive_seed({critic_cfg.seed, 0x7a1ULL}));

  AdamState actor_opt = AdamState::zeros(result.policy.net.params.size());
  AdamState value_opt = AdamState::zeros(value.params.size());
  AdamState critic_opt = AdamState::zeros(result.critic.net.params.size());
  std::vector<double> actor_grad(actor_opt.first_moment.size());
  std::vector<double> value_grad(value_opt.first_moment.size());
  std::vector<double> critic_grad(critic_opt.first_moment.size());

  long episode = 0;
  while (episode < cfg.episodes) {
    std::vector<Step> batch;
    const long stop = std::min<long>(cfg.episodes, episode + cfg.episodes_per_update);
    for (; episode < stop; ++episode) {
      const std::uint64_t ep_seed = derive_seed({cfg.seed, static_cast<std::uint64_t>(episode)});
      Episode ep(task, ep_seed);
      Rng actor_rng(episode_actor_seed(task, ep_seed));
      const std::size_t first = batch.size();
      while (!ep.done()) {
        Action a = sample_action(result.policy, ep.state(), actor_rng);
        TransitionSample t = ep.step(a);
        batch.push_back(Step{std::move(t), std::move(a)});
      }
      double g = 0.0;
      for (std::size_t k = batch.size(); k-- > first;) {
        g = batch[k].sample.reward + cfg.gamma * g;
        batch[k].ret = g;
      }
    }
    if (batch.empty()) continue;
    const double n = static_cast<double>(batch.size());

    std::vector<double> adv(batch.size());
    double mean = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      adv[k] = batch[k].ret - forward(value, batch[k].sample.state)[0];
      mean += adv[k];
    }
    mean /= n;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double scale = 1.0 / (std::sqrt(var / n) + 1e-8);

    std::fill(actor_grad.begin(), actor_grad.end(), 0.0);
    std::fill(value_grad.begin(), value_grad.end(), 0.0);
    std::fill(critic_grad.begin(), critic_grad.end(), 0.0);
    double td_sq = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const Step& st = batch[k];
      accumulate_log_prob_grad(result.policy, st.sample.state, st.sampled, -(adv[k] - mean) * scale / n, actor_grad);

      const double v = forward(value, st.sample.state)[0];
      const double dv[1] = {2.0 * (v - st.ret) / n};
      backward_accumulate(value, st.sample.state, dv, value_grad);

      const bool terminal = st.sample.done && !st.sample.truncated;
      const double next = terminal ? 0.0 : policy_q(result.policy, result.critic, space.action, st.sample.next_state);
      const std::vector<double> x = q_input(st.sample.state, space.action, st.sample.action);
      const double td = forward(result.critic.net, x)[0] - (st.sample.reward + cfg.gamma * next);
      td_sq += td * td;
      const double dq[1] = {2.0 * td / n};
      backward_accumulate(result.critic.net, x, dq, critic_grad);
    }
    result.critic_td_residual = td_sq / n;
    if (!all_finite(actor_grad) || !all_finite(value_grad) || !all_finite(critic_grad) ||
        !std::isfinite(result.critic_td_residual))
      throw TrainingError("policy gradient produced a non-finite loss", episode);
    adam_update(result.policy.net.params, actor_grad, actor_opt, cfg.actor_lr);
    adam_update(value.params, value_grad, value_opt, cfg.value_lr);
    adam_update(result.critic.net.params, critic_grad, critic_opt, cfg.critic_lr);
  }

  Knowledge k{ActorCriticK{result.policy, result.critic}, space};
  result.evaluation = evaluate_knowledge(task, k, cfg.eval_episodes, derive_seed({cfg.seed, 0xe1ULL}));
  result.passed = result.evaluation.mean > cfg.success_threshold;
  return result;
}

}  // namespace carol
