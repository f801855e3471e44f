#include "carol/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "carol/envs.hpp"
#include "carol/error.hpp"

namespace carol {

namespace {

Mlp make_net(int in, const NetConfig& cfg, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(out);
  return mlp_init(sizes, std::vector<Activation>(cfg.hidden.size(), cfg.activation), Activation::Identity, cfg.seed);
}

}  // namespace

NetworkPolicy make_policy_net(const SpaceSpec& space, const NetConfig& cfg) {
  if (is_discrete(space.action))
    return NetworkPolicy{make_net(space.state_dim, cfg, action_count(space.action)), PolicyFamily::SoftmaxDiscrete};
  return NetworkPolicy{make_net(space.state_dim, cfg, 2 * action_width(space.action)), PolicyFamily::DiagonalGaussian};
}

NetworkQ make_q_net(const SpaceSpec& space, const NetConfig& cfg) {
  return NetworkQ{make_net(space.state_dim + action_width(space.action), cfg, 1)};
}

std::string_view knowledge_kind_name(const Knowledge& k) {
  switch (k.body.index()) {
    case 0: return "policy";
    case 1: return "value";
    default: return "actor_critic";
  }
}

void check_compatible(const SpaceSpec& knowledge_space, const SpaceSpec& task_space) {
  if (knowledge_space.env != task_space.env)
    throw DomainError("knowledge trained on " + std::string(to_string(knowledge_space.env)) + ", task is " +
                      std::string(to_string(task_space.env)));
  if (knowledge_space.state_dim != task_space.state_dim)
    throw DomainError("knowledge state dimension " + std::to_string(knowledge_space.state_dim) +
                      " does not match task dimension " + std::to_string(task_space.state_dim));
  if (!(knowledge_space.action == task_space.action)) throw DomainError("knowledge action space does not match task");
}

int argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw DomainError("argmax of an empty vector");
  int best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = static_cast<int>(k);
  return best;
}

int tabular_state(std::span<const double> state) { return gridslip::state_index(state); }

namespace {

int tabular_action(const TabularPolicy& p, std::span<const double> state) {
  const int s = tabular_state(state);
  if (s >= static_cast<int>(p.actions.size())) throw DomainError("state outside tabular policy");
  return p.actions[s];
}

}  // namespace

bool is_discrete_policy(const Policy& policy) {
  if (const auto* n = std::get_if<NetworkPolicy>(&policy)) return n->family == PolicyFamily::SoftmaxDiscrete;
  return true;
}

std::vector<double> policy_logits(const Policy& policy, std::span<const double> state) {
  if (const auto* t = std::get_if<TabularPolicy>(&policy)) {
    const int a = tabular_action(*t, state);
    const double rest = t->n_actions > 1 ? (1.0 - kTabularLiftMass) / (t->n_actions - 1) : 0.0;
    std::vector<double> logits(t->n_actions, std::log(rest));
    logits[a] = std::log(t->n_actions > 1 ? kTabularLiftMass : 1.0);
    return logits;
  }
  const auto& n = std::get<NetworkPolicy>(policy);
  if (n.family != PolicyFamily::SoftmaxDiscrete) throw DomainError("logits requested from a Gaussian policy");
  return forward(n.net, state);
}

std::vector<double> action_probabilities(const Policy& policy, std::span<const double> state) {
  return softmax(policy_logits(policy, state));
}

GaussianParams gaussian_params(const NetworkPolicy& policy, std::span<const double> state) {
  if (policy.family != PolicyFamily::DiagonalGaussian) throw DomainError("gaussian parameters of a discrete policy");
  const std::vector<double> out = forward(policy.net, state);
  const std::size_t d = out.size() / 2;
  GaussianParams g{std::vector<double>(out.begin(), out.begin() + d), std::vector<double>(out.begin() + d, out.end())};
  for (double& ls : g.log_std) ls = std::clamp(ls, kMinLogStd, kMaxLogStd);
  return g;
}

double log_prob(const NetworkPolicy& policy, std::span<const double> state, const Action& action) {
  if (policy.family == PolicyFamily::SoftmaxDiscrete) {
    const std::vector<double> p = softmax(forward(policy.net, state));
    return std::log(p.at(std::get<int>(action)));
  }
  const GaussianParams g = gaussian_params(policy, state);
  const auto& a = std::get<std::vector<double>>(action);
  double lp = 0.0;
  for (std::size_t d = 0; d < g.mean.size(); ++d) {
    const double z = (a[d] - g.mean[d]) * std::exp(-g.log_std[d]);
    lp += -0.5 * z * z - g.log_std[d] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

void accumulate_log_prob_grad(const NetworkPolicy& policy, std::span<const double> state, const Action& action,
                              double scale, std::span<double> grads) {
  const std::vector<double> out = forward(policy.net, state);
  std::vector<double> upstream(out.size());
  if (policy.family == PolicyFamily::SoftmaxDiscrete) {
    const std::vector<double> p = softmax(out);
    const int a = std::get<int>(action);
    for (std::size_t k = 0; k < p.size(); ++k) upstream[k] = scale * ((static_cast<int>(k) == a ? 1.0 : 0.0) - p[k]);
  } else {
    const auto& a = std::get<std::vector<double>>(action);
    const std::size_t dims = out.size() / 2;
    for (std::size_t d = 0; d < dims; ++d) {
      const double raw_ls = out[dims + d];
      const double ls = std::clamp(raw_ls, kMinLogStd, kMaxLogStd);
      const double inv_var = std::exp(-2.0 * ls);
      const double diff = a[d] - out[d];
      upstream[d] = scale * diff * inv_var;
      const bool inside = raw_ls > kMinLogStd && raw_ls < kMaxLogStd;
      upstream[dims + d] = inside ? scale * (diff * diff * inv_var - 1.0) : 0.0;
    }
  }
  backward_accumulate(policy.net, state, upstream, grads);
}

Action sample_action(const Policy& policy, std::span<const double> state, Rng& rng) {
  if (is_discrete_policy(policy)) return static_cast<int>(rng.categorical(action_probabilities(policy, state)));
  GaussianParams g = gaussian_params(std::get<NetworkPolicy>(policy), state);
  for (std::size_t d = 0; d < g.mean.size(); ++d) g.mean[d] += std::exp(g.log_std[d]) * rng.normal();
  return g.mean;
}

Action greedy_action(const Policy& policy, std::span<const double> state) {
  if (const auto* t = std::get_if<TabularPolicy>(&policy)) return tabular_action(*t, state);
  if (is_discrete_policy(policy)) return argmax_lowest(policy_logits(policy, state));
  return gaussian_params(std::get<NetworkPolicy>(policy), state).mean;
}

std::vector<double> q_input(std::span<const double> state, const ActionSpec& actions, const Action& action) {
  std::vector<double> x(state.begin(), state.end());
  append_encoded_action(actions, action, x);
  return x;
}

std::vector<double> q_values(const QFunction& q, const ActionSpec& actions, std::span<const double> state) {
  if (const auto* t = std::get_if<TabularQ>(&q)) {
    const int s = tabular_state(state);
    if (s >= t->n_states) throw DomainError("state outside Q table");
    const auto row = t->row(s);
    return {row.begin(), row.end()};
  }
  if (!is_discrete(actions)) throw UnsupportedError("q_values needs a discrete action space");
  const auto& n = std::get<NetworkQ>(q);
  const int count = action_count(actions);
  std::vector<double> out(count);
  std::vector<double> x(state.begin(), state.end());
  x.resize(state.size() + count, 0.0);
  for (int a = 0; a < count; ++a) {
    x[state.size() + a] = 1.0;
    out[a] = forward(n.net, x)[0];
    x[state.size() + a] = 0.0;
  }
  return out;
}

double q_value(const QFunction& q, const ActionSpec& actions, std::span<const double> state, const Action& action) {
  if (const auto* t = std::get_if<TabularQ>(&q)) return t->at(tabular_state(state), std::get<int>(action));
  return forward(std::get<NetworkQ>(q).net, q_input(state, actions, action))[0];
}

Actor policy_actor(Policy policy, bool greedy) {
  return [policy = std::move(policy), greedy](std::span<const double> s, Rng& rng) -> Action {
    return greedy ? greedy_action(policy, s) : sample_action(policy, s, rng);
  };
}

Actor epsilon_greedy_actor(QFunction q, ActionSpec actions, double epsilon) {
  if (!is_discrete(actions)) throw UnsupportedError("epsilon-greedy acting needs a discrete action space");
  const int n = action_count(actions);
  return [q = std::move(q), actions = std::move(actions), epsilon, n](std::span<const double> s, Rng& rng) -> Action {
    if (epsilon > 0.0 && rng.uniform() < epsilon) return static_cast<int>(rng.index(n));
    return argmax_lowest(q_values(q, actions, s));
  };
}

Actor greedy_knowledge_actor(const Knowledge& k) {
  if (const auto* p = std::get_if<PolicyK>(&k.body)) return policy_actor(p->policy, true);
  if (const auto* ac = std::get_if<ActorCriticK>(&k.body)) return policy_actor(ac->policy, true);
  return epsilon_greedy_actor(std::get<ValueK>(k.body).q, k.space.action, 0.0);
}

}  // namespace carol
