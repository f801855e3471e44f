#pragma once

#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "carol/nn.hpp"
#include "carol/rollout.hpp"
#include "carol/task.hpp"

namespace carol {

enum class PolicyFamily : std::uint8_t { SoftmaxDiscrete = 0, DiagonalGaussian = 1 };

/// Probability a lifted tabular policy puts on its chosen action.
inline constexpr double kTabularLiftMass = 1.0 - 1e-3;

struct TabularPolicy {
  std::vector<int> actions;  // state index -> action index
  int n_actions = 0;
  bool operator==(const TabularPolicy&) const = default;
};

/// SoftmaxDiscrete nets emit one logit per action. DiagonalGaussian nets emit
/// the mean followed by the log standard deviation, the latter clamped to
/// [kMinLogStd, kMaxLogStd].
struct NetworkPolicy {
  Mlp net;
  PolicyFamily family = PolicyFamily::SoftmaxDiscrete;
  bool operator==(const NetworkPolicy&) const = default;
};

inline constexpr double kMinLogStd = -5.0;
inline constexpr double kMaxLogStd = 2.0;

struct TabularQ {
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.99;
  std::vector<double> values;  // row-major n_states x n_actions

  static TabularQ zeros(int n_states, int n_actions, double gamma) {
    return TabularQ{n_states, n_actions, gamma, std::vector<double>(static_cast<std::size_t>(n_states) * n_actions)};
  }
  double& at(int s, int a) { return values[static_cast<std::size_t>(s) * n_actions + a]; }
  double at(int s, int a) const { return values[static_cast<std::size_t>(s) * n_actions + a]; }
  std::span<const double> row(int s) const {
    return {values.data() + static_cast<std::size_t>(s) * n_actions, static_cast<std::size_t>(n_actions)};
  }
  bool operator==(const TabularQ&) const = default;
};
using QTable = TabularQ;

/// Maps state concatenated with the encoded action to a scalar.
struct NetworkQ {
  Mlp net;
  bool operator==(const NetworkQ&) const = default;
};

using Policy = std::variant<TabularPolicy, NetworkPolicy>;
using QFunction = std::variant<TabularQ, NetworkQ>;

struct PolicyK {
  Policy policy;
  bool operator==(const PolicyK&) const = default;
};
struct ValueK {
  QFunction q;
  bool operator==(const ValueK&) const = default;
};
struct ActorCriticK {
  Policy policy;
  QFunction q;
  bool operator==(const ActorCriticK&) const = default;
};

struct Knowledge {
  std::variant<PolicyK, ValueK, ActorCriticK> body;
  SpaceSpec space;
  bool operator==(const Knowledge&) const = default;
};

/// Architecture of a policy, critic or transition network.
struct NetConfig {
  std::vector<int> hidden{64, 64};
  Activation activation = Activation::ReLU;
  std::uint64_t seed = 0;
  bool operator==(const NetConfig&) const = default;
};

/// Logit head for discrete actions, mean plus log-std head otherwise.
NetworkPolicy make_policy_net(const SpaceSpec& space, const NetConfig& cfg);
/// Scalar head over state concatenated with the encoded action.
NetworkQ make_q_net(const SpaceSpec& space, const NetConfig& cfg);

std::string_view knowledge_kind_name(const Knowledge& k);

/// Throws DomainError unless the knowledge was trained against task's spaces.
void check_compatible(const SpaceSpec& knowledge_space, const SpaceSpec& task_space);

/// Lowest index among maximal entries.
int argmax_lowest(std::span<const double> values);

/// Table row of a tabular state (one-hot GridSlip encoding).
int tabular_state(std::span<const double> state);

/// Logits of a discrete policy; tabular policies are lifted to log of a
/// near-one-hot distribution.
std::vector<double> policy_logits(const Policy& policy, std::span<const double> state);
std::vector<double> action_probabilities(const Policy& policy, std::span<const double> state);

struct GaussianParams {
  std::vector<double> mean;
  std::vector<double> log_std;
};
GaussianParams gaussian_params(const NetworkPolicy& policy, std::span<const double> state);

bool is_discrete_policy(const Policy& policy);

/// log pi(action | state); a Gaussian action is the sampled, unclamped one.
double log_prob(const NetworkPolicy& policy, std::span<const double> state, const Action& action);
/// Adds scale * d log pi(action | state) / d params into grads.
void accumulate_log_prob_grad(const NetworkPolicy& policy, std::span<const double> state, const Action& action,
                              double scale, std::span<double> grads);
Action sample_action(const Policy& policy, std::span<const double> state, Rng& rng);
/// Argmax action (lowest index on ties) or the Gaussian mean.
Action greedy_action(const Policy& policy, std::span<const double> state);

/// Q values of every discrete action.
std::vector<double> q_values(const QFunction& q, const ActionSpec& actions, std::span<const double> state);
double q_value(const QFunction& q, const ActionSpec& actions, std::span<const double> state, const Action& action);
std::vector<double> q_input(std::span<const double> state, const ActionSpec& actions, const Action& action);

Actor policy_actor(Policy policy, bool greedy);
Actor epsilon_greedy_actor(QFunction q, ActionSpec actions, double epsilon);
/// Greedy actor for evaluation: the policy if there is one, else argmax Q.
Actor greedy_knowledge_actor(const Knowledge& k);

void write_knowledge(std::ostream& out, const Knowledge& k);
Knowledge read_knowledge(std::istream& in);
void save_knowledge(const std::string& path, const Knowledge& k);
Knowledge load_knowledge(const std::string& path);

}  // namespace carol
