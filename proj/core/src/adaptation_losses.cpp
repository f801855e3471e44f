#include <algorithm>
#include <cmath>

#include "carol/adaptation.hpp"
#include "carol/error.hpp"

namespace carol {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : data_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::push(TransitionSample sample) {
  data_[head_] = std::move(sample);
  head_ = (head_ + 1) % data_.size();
  size_ = std::min(size_ + 1, data_.size());
}

const TransitionSample& ReplayBuffer::operator[](std::size_t i) const {
  if (i >= size_) throw DomainError("replay index out of range");
  const std::size_t oldest = size_ < data_.size() ? 0 : head_;
  return data_[(oldest + i) % data_.size()];
}

std::vector<TransitionSample> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (n > size_) throw DomainError("minibatch larger than the replay buffer");
  std::vector<std::size_t> idx(size_);
  for (std::size_t i = 0; i < size_; ++i) idx[i] = i;
  std::vector<TransitionSample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::swap(idx[k], idx[k + rng.index(size_ - k)]);
    out.push_back((*this)[idx[k]]);
  }
  return out;
}

namespace {

void check_weights(std::size_t n, const SimilarityWeights& w) {
  if (w.size() != n)
    throw DomainError("got " + std::to_string(n) + " sources but " + std::to_string(w.size()) + " weights");
  validate(w);
}

bool teacher_is_gaussian(const Policy& p) {
  const auto* n = std::get_if<NetworkPolicy>(&p);
  return n != nullptr && n->family == PolicyFamily::DiagonalGaussian;
}

}  // namespace

LossAndGrad policy_distill_loss(const NetworkPolicy& student, const std::vector<Policy>& teachers,
                                const SimilarityWeights& w, const std::vector<State>& states, double temperature) {
  check_weights(teachers.size(), w);
  if (!(temperature > 0.0)) throw DomainError("distillation temperature must be positive");
  const bool gaussian = student.family == PolicyFamily::DiagonalGaussian;
  for (const Policy& t : teachers)
    if (teacher_is_gaussian(t) != gaussian) throw DomainError("teacher and student policy families differ");

  LossAndGrad out{0.0, std::vector<double>(student.net.params.size(), 0.0)};
  std::vector<double> upstream;
  for (const State& s : states) {
    const std::vector<double> raw = forward(student.net, s);
    upstream.assign(raw.size(), 0.0);
    if (!gaussian) {
      const std::vector<double> ps = softmax(raw);
      for (std::size_t i = 0; i < teachers.size(); ++i) {
        if (w.weights[i] == 0.0) continue;
        const std::vector<double> tl = policy_logits(teachers[i], s);
        if (tl.size() != raw.size()) throw DomainError("teacher and student action counts differ");
        out.loss += w.weights[i] * kl_softmax(tl, raw, temperature);
        const std::vector<double> pt = softmax(tl, temperature);
        for (std::size_t k = 0; k < raw.size(); ++k) upstream[k] += w.weights[i] * (ps[k] - pt[k]);
      }
    } else {
      const std::size_t d = raw.size() / 2;
      const std::span<const double> mean(raw.data(), d);
      std::vector<double> log_std(raw.begin() + d, raw.end());
      for (double& ls : log_std) ls = std::clamp(ls, kMinLogStd, kMaxLogStd);
      for (std::size_t i = 0; i < teachers.size(); ++i) {
        if (w.weights[i] == 0.0) continue;
        const GaussianParams tp = gaussian_params(std::get<NetworkPolicy>(teachers[i]), s);
        if (tp.mean.size() != d) throw DomainError("teacher and student action dimensions differ");
        const GaussianKl kl = kl_gaussian_with_grad(tp.mean, tp.log_std, mean, log_std);
        out.loss += w.weights[i] * kl.value;
        for (std::size_t k = 0; k < d; ++k) {
          upstream[k] += w.weights[i] * kl.d_student_mean[k];
          const bool inside = raw[d + k] > kMinLogStd && raw[d + k] < kMaxLogStd;
          if (inside) upstream[d + k] += w.weights[i] * kl.d_student_log_std[k];
        }
      }
    }
    backward_accumulate(student.net, s, upstream, out.grads);
  }
  return out;
}

double q_next_target(const std::vector<QFunction>& sources, const SimilarityWeights& w, const ActionSpec& actions,
                     std::span<const double> s_plus, bool terminal) {
  check_weights(sources.size(), w);
  if (!is_discrete(actions)) throw UnsupportedError("Q_next needs a discrete action space");
  if (terminal) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::vector<double> q = q_values(sources[i], actions, s_plus);
    total += w.weights[i] * q[argmax_lowest(q)];
  }
  return total;
}

LossAndGrad td_loss(const QFunction& qg, const ActionSpec& actions, const std::vector<TransitionSample>& batch,
                    std::span<const double> q_next_values, double gamma) {
  if (batch.size() != q_next_values.size())
    throw DomainError("batch has " + std::to_string(batch.size()) + " samples but " +
                      std::to_string(q_next_values.size()) + " targets");
  LossAndGrad out;
  if (const auto* t = std::get_if<TabularQ>(&qg)) {
    out.grads.assign(t->values.size(), 0.0);
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const int s = tabular_state(batch[k].state);
      const int a = std::get<int>(batch[k].action);
      const double d = t->at(s, a) - batch[k].reward - gamma * q_next_values[k];
      out.loss += d * d;
      out.grads[static_cast<std::size_t>(s) * t->n_actions + a] += 2.0 * d;
    }
    return out;
  }
  const Mlp& net = std::get<NetworkQ>(qg).net;
  out.grads.assign(net.params.size(), 0.0);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const std::vector<double> x = q_input(batch[k].state, actions, batch[k].action);
    const double d = forward(net, x)[0] - batch[k].reward - gamma * q_next_values[k];
    out.loss += d * d;
    const double up[1] = {2.0 * d};
    backward_accumulate(net, x, up, out.grads);
  }
  return out;
}

LossAndGrad critic_guidance_loss(const NetworkPolicy& actor, const std::vector<NetworkQ>& critics,
                                 const SimilarityWeights& w, const ActionSpec& actions,
                                 const std::vector<State>& states) {
  check_weights(critics.size(), w);
  const bool discrete = actor.family == PolicyFamily::SoftmaxDiscrete;
  if (discrete != is_discrete(actions)) throw DomainError("actor family does not match the action space");
  const std::size_t width = static_cast<std::size_t>(action_width(actions));
  LossAndGrad out{0.0, std::vector<double>(actor.net.params.size(), 0.0)};
  std::vector<double> input_grad;
  for (const State& s : states) {
    const std::vector<double> raw = forward(actor.net, s);
    std::vector<double> action = discrete ? softmax(raw) : std::vector<double>(raw.begin(), raw.begin() + width);
    std::vector<double> x(s.begin(), s.end());
    x.insert(x.end(), action.begin(), action.end());
    std::vector<double> d_action(width, 0.0);
    for (std::size_t i = 0; i < critics.size(); ++i) {
      if (w.weights[i] == 0.0) continue;
      out.loss -= w.weights[i] * forward(critics[i].net, x)[0];
      const double up[1] = {-w.weights[i]};
      std::vector<double> scratch(critics[i].net.params.size(), 0.0);
      backward_accumulate(critics[i].net, x, up, scratch, &input_grad);
      for (std::size_t k = 0; k < width; ++k) d_action[k] += input_grad[s.size() + k];
    }
    std::vector<double> upstream(raw.size(), 0.0);
    if (discrete) {
      double dot = 0.0;
      for (std::size_t k = 0; k < width; ++k) dot += action[k] * d_action[k];
      for (std::size_t k = 0; k < width; ++k) upstream[k] = action[k] * (d_action[k] - dot);
    } else {
      std::copy(d_action.begin(), d_action.end(), upstream.begin());
    }
    backward_accumulate(actor.net, s, upstream, out.grads);
  }
  return out;
}

LossAndGrad actor_critic_loss(const NetworkPolicy& student, const std::vector<Policy>& teachers,
                              const std::vector<NetworkQ>& critics, const SimilarityWeights& w,
                              const ActionSpec& actions, const std::vector<State>& states, double temperature,
                              double beta) {
  if (teachers.size() != critics.size()) throw DomainError("actor-critic adaptation needs one critic per actor");
  if (!(beta >= 0.0)) throw DomainError("beta must be nonnegative");
  LossAndGrad out = policy_distill_loss(student, teachers, w, states, temperature);
  if (beta == 0.0) return out;
  const LossAndGrad lc = critic_guidance_loss(student, critics, w, actions, states);
  out.loss += beta * lc.loss;
  for (std::size_t k = 0; k < out.grads.size(); ++k) out.grads[k] += beta * lc.grads[k];
  return out;
}

LossAndGrad reinforce_loss(const NetworkPolicy& policy, const std::vector<State>& states,
                           const std::vector<Action>& sampled_actions, std::span<const double> advantages) {
  if (states.size() != sampled_actions.size() || states.size() != advantages.size())
    throw DomainError("reinforce inputs are misaligned");
  LossAndGrad out{0.0, std::vector<double>(policy.net.params.size(), 0.0)};
  for (std::size_t k = 0; k < states.size(); ++k) {
    out.loss -= advantages[k] * log_prob(policy, states[k], sampled_actions[k]);
    accumulate_log_prob_grad(policy, states[k], sampled_actions[k], -advantages[k], out.grads);
  }
  return out;
}

std::vector<double> self_td_next(const QFunction& qg, const ActionSpec& actions,
                                 const std::vector<TransitionSample>& batch) {
  std::vector<double> out(batch.size(), 0.0);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    if (batch[k].done && !batch[k].truncated) continue;
    const std::vector<double> q = q_values(qg, actions, batch[k].next_state);
    out[k] = q[argmax_lowest(q)];
  }
  return out;
}

LossAndGrad carol_plus_loss(CarolLossKind base, const LossAndGrad& carol, StandardLossKind standard_kind,
                            const LossAndGrad& standard, double lambda) {
  const bool matches = (base == CarolLossKind::Value) == (standard_kind == StandardLossKind::SelfTd);
  if (!matches)
    throw ConfigError(base == CarolLossKind::Value ? "value adaptation pairs with a self-bootstrapped TD loss"
                                                   : "policy adaptation pairs with a policy-gradient loss");
  if (!(lambda >= 0.0)) throw ConfigError("carol_plus_weight must be nonnegative");
  if (lambda == 0.0) return carol;
  if (standard.grads.size() != carol.grads.size()) throw DomainError("loss gradients have different sizes");
  LossAndGrad out = carol;
  out.loss += lambda * standard.loss;
  for (std::size_t k = 0; k < out.grads.size(); ++k) out.grads[k] += lambda * standard.grads[k];
  return out;
}

}  // namespace carol
