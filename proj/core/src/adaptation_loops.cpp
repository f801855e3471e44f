#include <cmath>
#include <numeric>

#include "carol/adaptation.hpp"
#include "carol/error.hpp"

namespace carol {

void AdaptConfig::validate() const {
  if (iterations < 0) throw ConfigError("iterations must be nonnegative");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (!(beta >= 0.0)) throw ConfigError("beta must be nonnegative");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (minibatch_size <= 0) throw ConfigError("minibatch_size must be positive");
  if (rollout_episodes_per_iter <= 0) throw ConfigError("rollout_episodes_per_iter must be positive");
  if (replay_capacity <= 0) throw ConfigError("replay_capacity must be positive");
  if (replay_min_fill <= 0 || replay_min_fill > replay_capacity)
    throw ConfigError("replay_min_fill must lie in [1, replay_capacity]");
  if (minibatch_size > replay_min_fill) throw ConfigError("minibatch_size must not exceed replay_min_fill");
  if (!(carol_plus_weight >= 0.0)) throw ConfigError("carol_plus_weight must be nonnegative");
  if (eval_episodes <= 0) throw ConfigError("eval_episodes must be positive");
  epsilon.validate();
}

std::uint64_t curve_eval_seed(const AdaptConfig& cfg) { return derive_seed({cfg.seed, 0xe7a1ULL}); }

namespace {

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, std::size_t n, double lr) : kind_(kind), adam_(AdamState::zeros(n)), lr_(lr) {}

  void step(std::span<double> params, std::span<const double> grads) {
    if (kind_ == OptimizerKind::Adam) adam_update(params, grads, adam_, lr_);
    else sgd_update(params, grads, lr_);
  }

 private:
  OptimizerKind kind_;
  AdamState adam_;
  double lr_;
};

void check_finite(const LossAndGrad& l, long iteration) {
  if (!std::isfinite(l.loss)) throw TrainingError("adaptation loss is not finite", iteration);
  for (double g : l.grads)
    if (!std::isfinite(g)) throw TrainingError("adaptation gradient is not finite", iteration);
}

void check_teachers(const std::vector<Policy>& teachers, const TaskHandle& target) {
  for (const Policy& p : teachers) {
    if (is_discrete_policy(p) != is_discrete(target.action_spec()))
      throw DomainError("teacher policy family does not match the target action space");
    if (const auto* t = std::get_if<TabularPolicy>(&p)) {
      if (t->n_actions != action_count(target.action_spec()) ||
          static_cast<int>(t->actions.size()) != target.state_dim())
        throw DomainError("tabular teacher does not match the target spaces");
    } else if (std::get<NetworkPolicy>(p).net.input_size() != target.state_dim()) {
      throw DomainError("teacher network input does not match the target state dimension");
    }
  }
}

CurvePoint evaluate_point(const TaskHandle& target, const Knowledge& k, int iteration, long episodes,
                          const AdaptConfig& cfg) {
  const EvalStats e = evaluate_knowledge(target, k, cfg.eval_episodes, curve_eval_seed(cfg));
  return CurvePoint{iteration, episodes, e.mean, e.std};
}

}  // namespace

namespace detail {

PolicyAdaptResult policy_loop(const PolicyLoopTerms& terms, const SimilarityWeights& w, const TaskHandle& target,
                              const NetConfig& student_config, const AdaptConfig& cfg, const ParamObserver& observer) {
  cfg.validate();
  const bool use_carol = terms.carol_weight > 0.0;
  if (use_carol) {
    if (terms.teachers == nullptr || terms.teachers->empty()) throw ConfigError("policy adaptation needs teachers");
    check_teachers(*terms.teachers, target);
    if (terms.beta > 0.0 && (terms.critics == nullptr || terms.critics->size() != terms.teachers->size()))
      throw DomainError("actor-critic adaptation needs one critic per actor");
  }
  PolicyAdaptResult result;
  result.student = make_policy_net(target.space(), student_config);
  NetworkPolicy& student = result.student;
  Optimizer opt(cfg.optimizer, student.net.params.size(), cfg.lr);
  Rng shuffle_rng(derive_seed({cfg.seed, 0x5bffULL}));
  const CarolLossKind kind = terms.critics != nullptr ? CarolLossKind::ActorCritic : CarolLossKind::Policy;

  long episodes = 0;
  result.curve.push_back(evaluate_point(target, Knowledge{PolicyK{student}, target.space()}, 0, 0, cfg));
  for (int it = 1; it <= cfg.iterations; ++it) {
    std::vector<State> states;
    std::vector<Action> sampled;
    std::vector<double> returns;
    for (int e = 0; e < cfg.rollout_episodes_per_iter; ++e, ++episodes) {
      const std::uint64_t ep_seed = derive_seed({cfg.seed, 0x7011ULL, static_cast<std::uint64_t>(episodes)});
      Episode ep(target, ep_seed);
      Rng actor_rng(episode_actor_seed(target, ep_seed));
      std::vector<double> rewards;
      while (!ep.done()) {
        Action a = sample_action(student, ep.state(), actor_rng);
        states.push_back(ep.state());
        rewards.push_back(ep.step(a).reward);
        sampled.push_back(std::move(a));
      }
      std::vector<double> g(rewards.size());
      double acc = 0.0;
      for (std::size_t k = rewards.size(); k-- > 0;) g[k] = acc = rewards[k] + cfg.gamma * acc;
      returns.insert(returns.end(), g.begin(), g.end());
    }
    const double baseline =
        returns.empty() ? 0.0 : std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());

    std::vector<std::size_t> order(states.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch_size));
      std::vector<State> bs;
      std::vector<Action> ba;
      std::vector<double> adv;
      for (std::size_t j = start; j < stop; ++j) {
        bs.push_back(states[order[j]]);
        ba.push_back(sampled[order[j]]);
        adv.push_back(returns[order[j]] - baseline);
      }
      LossAndGrad loss{0.0, std::vector<double>(student.net.params.size(), 0.0)};
      if (use_carol) {
        loss = terms.critics != nullptr
                   ? actor_critic_loss(student, *terms.teachers, *terms.critics, w, target.action_spec(), bs,
                                       cfg.temperature, terms.beta)
                   : policy_distill_loss(student, *terms.teachers, w, bs, cfg.temperature);
        if (terms.carol_weight != 1.0) {
          loss.loss *= terms.carol_weight;
          for (double& g : loss.grads) g *= terms.carol_weight;
        }
      }
      if (terms.standard_weight > 0.0)
        loss = carol_plus_loss(kind, loss, StandardLossKind::PolicyGradient, reinforce_loss(student, bs, ba, adv),
                               terms.standard_weight);
      check_finite(loss, it);
      opt.step(student.net.params, loss.grads);
    }
    if (observer) observer(it, student.net.params);
    result.curve.push_back(evaluate_point(target, Knowledge{PolicyK{student}, target.space()}, it, episodes, cfg));
  }
  return result;
}

ValueAdaptResult value_loop(const std::vector<QFunction>* sources, const SimilarityWeights& w, double carol_weight,
                            double standard_weight, const TaskHandle& target, const QModelConfig& qnet_config,
                            const AdaptConfig& cfg, const ParamObserver& observer) {
  cfg.validate();
  const ActionSpec& actions = target.action_spec();
  if (!is_discrete(actions)) throw UnsupportedError("value-based adaptation needs a discrete action space");
  const bool use_carol = carol_weight > 0.0;
  if (use_carol) {
    if (sources == nullptr || sources->empty()) throw ConfigError("value adaptation needs source Q functions");
    if (sources->size() != w.size()) throw DomainError("one weight per source Q function is required");
    validate(w);
  }
  ValueAdaptResult result;
  if (qnet_config.kind == QModelConfig::Kind::Tabular) {
    if (target.env_kind() != EnvKind::GridSlip) throw UnsupportedError("a tabular Q_g needs a tabular target");
    result.q = TabularQ::zeros(target.state_dim(), action_count(actions), cfg.gamma);
  } else {
    result.q = make_q_net(target.space(), qnet_config.net);
  }
  auto params = [&result]() -> std::span<double> {
    if (auto* t = std::get_if<TabularQ>(&result.q)) return t->values;
    return std::get<NetworkQ>(result.q).net.params;
  };
  Optimizer opt(cfg.optimizer, params().size(), cfg.lr);
  ReplayBuffer replay(static_cast<std::size_t>(cfg.replay_capacity));
  Rng explore(derive_seed({cfg.seed, 0xe5ULL}));
  Rng batch_rng(derive_seed({cfg.seed, 0x5aULL}));
  const int n_actions = action_count(actions);

  result.curve.push_back(evaluate_point(target, Knowledge{ValueK{result.q}, target.space()}, 0, 0, cfg));
  for (int it = 1; it <= cfg.iterations; ++it) {
    const double eps = cfg.epsilon.at(it - 1);
    Episode ep(target, derive_seed({cfg.seed, 0x7011ULL, static_cast<std::uint64_t>(it - 1)}));
    while (!ep.done()) {
      int a;
      if (eps > 0.0 && explore.uniform() < eps) a = static_cast<int>(explore.index(n_actions));
      else a = argmax_lowest(q_values(result.q, actions, ep.state()));
      replay.push(ep.step(a));
      if (replay.size() < static_cast<std::size_t>(cfg.replay_min_fill)) continue;

      const std::vector<TransitionSample> batch = replay.sample(static_cast<std::size_t>(cfg.minibatch_size), batch_rng);
      LossAndGrad loss{0.0, std::vector<double>(params().size(), 0.0)};
      if (use_carol) {
        std::vector<double> q_next(batch.size());
        for (std::size_t k = 0; k < batch.size(); ++k)
          q_next[k] = q_next_target(*sources, w, actions, batch[k].next_state, batch[k].done && !batch[k].truncated);
        loss = td_loss(result.q, actions, batch, q_next, cfg.gamma);
        if (carol_weight != 1.0) {
          loss.loss *= carol_weight;
          for (double& g : loss.grads) g *= carol_weight;
        }
      }
      if (standard_weight > 0.0)
        loss = carol_plus_loss(CarolLossKind::Value, loss, StandardLossKind::SelfTd,
                               td_loss(result.q, actions, batch, self_td_next(result.q, actions, batch), cfg.gamma),
                               standard_weight);
      check_finite(loss, it);
      opt.step(params(), loss.grads);
    }
    if (observer) observer(it, params());
    result.curve.push_back(evaluate_point(target, Knowledge{ValueK{result.q}, target.space()}, it, it, cfg));
  }
  return result;
}

}  // namespace detail

PolicyAdaptResult carol_policy_adapt(const std::vector<Policy>& teachers, const SimilarityWeights& w,
                                     const TaskHandle& target, const NetConfig& student_config,
                                     const AdaptConfig& cfg, const ParamObserver& observer) {
  detail::PolicyLoopTerms terms;
  terms.teachers = &teachers;
  terms.standard_weight = cfg.carol_plus_weight;
  return detail::policy_loop(terms, w, target, student_config, cfg, observer);
}

ValueAdaptResult carol_value_adapt(const std::vector<QFunction>& sources, const SimilarityWeights& w,
                                   const TaskHandle& target, const QModelConfig& qnet_config, const AdaptConfig& cfg,
                                   const ParamObserver& observer) {
  return detail::value_loop(&sources, w, 1.0, cfg.carol_plus_weight, target, qnet_config, cfg, observer);
}

PolicyAdaptResult carol_ac_adapt(const std::vector<Policy>& source_actors, const std::vector<NetworkQ>& source_critics,
                                 const SimilarityWeights& w, const TaskHandle& target,
                                 const NetConfig& student_config, const AdaptConfig& cfg,
                                 const ParamObserver& observer) {
  if (source_actors.size() != source_critics.size())
    throw DomainError("actor-critic adaptation needs one critic per actor");
  detail::PolicyLoopTerms terms;
  terms.teachers = &source_actors;
  terms.critics = &source_critics;
  terms.beta = cfg.beta;
  terms.standard_weight = cfg.carol_plus_weight;
  return detail::policy_loop(terms, w, target, student_config, cfg, observer);
}

}  // namespace carol
