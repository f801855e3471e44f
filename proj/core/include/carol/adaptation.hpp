#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "carol/context.hpp"
#include "carol/knowledge.hpp"
#include "carol/source_training.hpp"
#include "carol/task.hpp"

namespace carol {

enum class OptimizerKind { Adam, Sgd };

struct AdaptConfig {
  int iterations = 100;  // K
  double lr = 1e-3;
  double temperature = 1.0;
  double beta = 1.0;
  double gamma = 0.99;
  int minibatch_size = 64;
  int rollout_episodes_per_iter = 4;
  int replay_capacity = 10000;
  int replay_min_fill = 64;
  EpsilonSchedule epsilon;
  double carol_plus_weight = 0.0;  // lambda
  OptimizerKind optimizer = OptimizerKind::Adam;
  int eval_episodes = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CurvePoint {
  int iteration = 0;
  long episodes_seen = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  bool operator==(const CurvePoint&) const = default;
};
using LearningCurve = std::vector<CurvePoint>;

/// Called after every iteration with the learner's current parameters.
using ParamObserver = std::function<void(int iteration, std::span<const double> params)>;

/// Fixed-capacity FIFO of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(TransitionSample sample);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return data_.size(); }
  /// i = 0 is the oldest retained sample.
  const TransitionSample& operator[](std::size_t i) const;
  /// n distinct samples drawn uniformly without replacement.
  std::vector<TransitionSample> sample(std::size_t n, Rng& rng) const;

 private:
  std::vector<TransitionSample> data_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grads;
};

/// Sum over states and teachers of w_i * D(teacher_i(s) || student(s)).
LossAndGrad policy_distill_loss(const NetworkPolicy& student, const std::vector<Policy>& teachers,
                                const SimilarityWeights& w, const std::vector<State>& states, double temperature);

/// Weighted sum of each source's own greedy value at s_plus; 0 if terminal.
double q_next_target(const std::vector<QFunction>& sources, const SimilarityWeights& w, const ActionSpec& actions,
                     std::span<const double> s_plus, bool terminal = false);

/// Sum over the batch of (Q_g(s, a) - r - gamma * q_next)^2. Gradients are
/// w.r.t. the table entries or the network parameters.
LossAndGrad td_loss(const QFunction& qg, const ActionSpec& actions, const std::vector<TransitionSample>& batch,
                    std::span<const double> q_next_values, double gamma);

/// -sum_s sum_i w_i Q_i(s, pi(s)). Gaussian actors feed their mean action,
/// discrete actors their action-probability vector.
LossAndGrad critic_guidance_loss(const NetworkPolicy& actor, const std::vector<NetworkQ>& critics,
                                 const SimilarityWeights& w, const ActionSpec& actions,
                                 const std::vector<State>& states);

/// L_P + beta * L_C; the critic term is skipped entirely when beta == 0.
LossAndGrad actor_critic_loss(const NetworkPolicy& student, const std::vector<Policy>& teachers,
                              const std::vector<NetworkQ>& critics, const SimilarityWeights& w,
                              const ActionSpec& actions, const std::vector<State>& states, double temperature,
                              double beta);

/// -sum_k advantage_k * log pi(action_k | state_k).
LossAndGrad reinforce_loss(const NetworkPolicy& policy, const std::vector<State>& states,
                           const std::vector<Action>& sampled_actions, std::span<const double> advantages);

/// Bootstrap values max_a Q_g(s', a) per sample, 0 at terminal transitions.
std::vector<double> self_td_next(const QFunction& qg, const ActionSpec& actions,
                                 const std::vector<TransitionSample>& batch);

enum class CarolLossKind { Policy, Value, ActorCritic };
enum class StandardLossKind { PolicyGradient, SelfTd };

/// carol + lambda * standard. Policy and actor-critic losses pair with the
/// policy-gradient surrogate, value losses with self-bootstrapped TD.
LossAndGrad carol_plus_loss(CarolLossKind base, const LossAndGrad& carol, StandardLossKind standard_kind,
                            const LossAndGrad& standard, double lambda);

struct PolicyAdaptResult {
  NetworkPolicy student;
  LearningCurve curve;
};

struct ValueAdaptResult {
  QFunction q;
  LearningCurve curve;
};

struct QModelConfig {
  enum class Kind { Tabular, Network } kind = Kind::Tabular;
  NetConfig net;
};

/// Algorithm 1 (plus the CARoL+ policy-gradient term when lambda > 0).
PolicyAdaptResult carol_policy_adapt(const std::vector<Policy>& teachers, const SimilarityWeights& w,
                                     const TaskHandle& target, const NetConfig& student_config,
                                     const AdaptConfig& cfg, const ParamObserver& observer = {});

/// Algorithm 2 (plus self-bootstrapped TD when lambda > 0). One iteration is
/// one acting episode.
ValueAdaptResult carol_value_adapt(const std::vector<QFunction>& sources, const SimilarityWeights& w,
                                   const TaskHandle& target, const QModelConfig& qnet_config, const AdaptConfig& cfg,
                                   const ParamObserver& observer = {});

/// Algorithm 3: minimizes L_P + beta * L_C with frozen source critics.
PolicyAdaptResult carol_ac_adapt(const std::vector<Policy>& source_actors, const std::vector<NetworkQ>& source_critics,
                                 const SimilarityWeights& w, const TaskHandle& target,
                                 const NetConfig& student_config, const AdaptConfig& cfg,
                                 const ParamObserver& observer = {});

/// Learning loops shared with the baselines. Weight 0 on the CARoL term
/// turns a loop into plain REINFORCE or plain TD learning.
namespace detail {

struct PolicyLoopTerms {
  const std::vector<Policy>* teachers = nullptr;
  const std::vector<NetworkQ>* critics = nullptr;
  double carol_weight = 1.0;
  double beta = 0.0;
  double standard_weight = 0.0;
};

PolicyAdaptResult policy_loop(const PolicyLoopTerms& terms, const SimilarityWeights& w, const TaskHandle& target,
                              const NetConfig& student_config, const AdaptConfig& cfg, const ParamObserver& observer);

ValueAdaptResult value_loop(const std::vector<QFunction>* sources, const SimilarityWeights& w, double carol_weight,
                            double standard_weight, const TaskHandle& target, const QModelConfig& qnet_config,
                            const AdaptConfig& cfg, const ParamObserver& observer);

}  // namespace detail

/// Evaluation seed shared by every method run with this config seed.
std::uint64_t curve_eval_seed(const AdaptConfig& cfg);

}  // namespace carol
