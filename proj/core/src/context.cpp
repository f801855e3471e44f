#include "carol/context.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "binary_io.hpp"
#include "carol/error.hpp"
#include "carol/rollout.hpp"
#include "space_io.hpp"

namespace carol {

std::vector<TransitionSample> collect_probe(const TaskHandle& task, const ProbePolicy& probe, std::size_t m_g,
                                            std::uint64_t seed) {
  if (m_g == 0) throw ConfigError("probe sample count m_g must be at least 1");
  Actor actor;
  if (const auto* k = std::get_if<Knowledge>(&probe)) {
    check_compatible(k->space, task.space());
    if (const auto* p = std::get_if<PolicyK>(&k->body)) actor = policy_actor(p->policy, false);
    else if (const auto* ac = std::get_if<ActorCriticK>(&k->body)) actor = policy_actor(ac->policy, false);
    else actor = greedy_knowledge_actor(*k);
  } else {
    actor = uniform_random_actor(task.action_spec());
  }
  std::vector<TransitionSample> out;
  out.reserve(m_g);
  for (std::uint64_t e = 0; out.size() < m_g; ++e) {
    const std::uint64_t ep_seed = derive_seed({seed, 0x9f0beULL, e});
    Episode ep(task, ep_seed);
    Rng actor_rng(episode_actor_seed(task, ep_seed));
    while (!ep.done() && out.size() < m_g) out.push_back(ep.step(actor(ep.state(), actor_rng)));
  }
  return out;
}

std::vector<double> TransitionModel::predict(std::span<const double> state, const Action& action) const {
  if (static_cast<int>(state.size()) != space.state_dim)
    throw DomainError("transition model expects state dimension " + std::to_string(space.state_dim) + ", got " +
                      std::to_string(state.size()));
  std::vector<double> x(state.begin(), state.end());
  append_encoded_action(space.action, action, x);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = (x[k] - input.mean[k]) / input.std[k];
  std::vector<double> y = forward(net, x);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = y[k] * output.std[k] + output.mean[k];
  return y;
}

void FitConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (minibatch_size <= 0) throw ConfigError("minibatch_size must be positive");
  if (!(holdout_frac >= 0.0 && holdout_frac < 0.5)) throw ConfigError("holdout_frac must lie in [0, 0.5)");
}

std::uint64_t sample_hash(const TransitionSample& sample) {
  std::uint64_t h = 0x5bd1e995ULL;
  auto absorb = [&h](std::uint64_t v) { h = mix64(h ^ mix64(v)); };
  for (double v : sample.state) absorb(std::bit_cast<std::uint64_t>(v));
  if (const int* a = std::get_if<int>(&sample.action)) {
    absorb(static_cast<std::uint64_t>(*a));
  } else {
    for (double v : std::get<std::vector<double>>(sample.action)) absorb(std::bit_cast<std::uint64_t>(v));
  }
  for (double v : sample.next_state) absorb(std::bit_cast<std::uint64_t>(v));
  absorb(std::bit_cast<std::uint64_t>(sample.reward));
  absorb(sample.done ? 1 : 0);
  return h;
}

std::vector<bool> holdout_mask(const std::vector<TransitionSample>& samples, double holdout_frac, std::uint64_t seed) {
  std::vector<bool> mask(samples.size(), false);
  if (holdout_frac <= 0.0) return mask;
  std::unordered_map<std::uint64_t, std::uint64_t> seen;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::uint64_t h = sample_hash(samples[i]);
    const std::uint64_t occurrence = seen[h]++;
    const double u = static_cast<double>(derive_seed({seed, h, occurrence}) >> 11) * 0x1.0p-53;
    mask[i] = u < holdout_frac;
  }
  return mask;
}

namespace {

Normalizer fit_normalizer(const std::vector<std::vector<double>>& rows) {
  const std::size_t d = rows.front().size();
  Normalizer n{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& r : rows)
    for (std::size_t k = 0; k < d; ++k) n.mean[k] += r[k];
  for (double& m : n.mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t k = 0; k < d; ++k) n.std[k] += (r[k] - n.mean[k]) * (r[k] - n.mean[k]);
  for (double& s : n.std) s = std::max(std::sqrt(s / static_cast<double>(rows.size())), kMinStd);
  return n;
}

void check_sample_dims(const SpaceSpec& space, const TransitionSample& s) {
  if (static_cast<int>(s.state.size()) != space.state_dim || static_cast<int>(s.next_state.size()) != space.state_dim)
    throw DomainError("sample state dimension does not match the model's state dimension " +
                      std::to_string(space.state_dim));
}

double squared_error(const TransitionModel& model, const TransitionSample& s) {
  check_sample_dims(model.space, s);
  const std::vector<double> pred = model.predict(s.state, s.action);
  double e = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) e += (pred[k] - s.next_state[k]) * (pred[k] - s.next_state[k]);
  return e;
}

}  // namespace

FitResult fit_transition_model(const SpaceSpec& space, const std::vector<TransitionSample>& samples,
                               const FitConfig& cfg) {
  cfg.validate();
  if (samples.size() < kMinFitSamples)
    throw DataError("transition model needs at least " + std::to_string(kMinFitSamples) + " samples, got " +
                    std::to_string(samples.size()));
  const std::vector<bool> holdout = holdout_mask(samples, cfg.holdout_frac, cfg.seed);
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<double>> ys;
  std::vector<const TransitionSample*> held;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    check_sample_dims(space, samples[i]);
    if (holdout[i]) {
      held.push_back(&samples[i]);
      continue;
    }
    std::vector<double> x = samples[i].state;
    append_encoded_action(space.action, samples[i].action, x);
    xs.push_back(std::move(x));
    ys.push_back(samples[i].next_state);
  }
  if (xs.empty()) throw DataError("holdout split left no training samples");

  FitResult result;
  TransitionModel& m = result.model;
  m.space = space;
  m.input = fit_normalizer(xs);
  m.output = fit_normalizer(ys);
  std::vector<int> sizes{static_cast<int>(xs.front().size())};
  sizes.insert(sizes.end(), cfg.net.hidden.begin(), cfg.net.hidden.end());
  sizes.push_back(space.state_dim);
  m.net = mlp_init(sizes, std::vector<Activation>(cfg.net.hidden.size(), cfg.net.activation), Activation::Identity,
                   cfg.net.seed);

  for (auto& x : xs)
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = (x[k] - m.input.mean[k]) / m.input.std[k];
  for (auto& y : ys)
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = (y[k] - m.output.mean[k]) / m.output.std[k];

  AdamState opt = AdamState::zeros(m.net.params.size());
  std::vector<double> grad(m.net.params.size());
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed({cfg.seed, 0xf17ULL}));
  const std::size_t batch = static_cast<std::size_t>(cfg.minibatch_size);
  std::vector<double> upstream(space.state_dim);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const double scale = 2.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t j = start; j < stop; ++j) {
        const std::size_t i = order[j];
        const std::vector<double> out = forward(m.net, xs[i]);
        for (std::size_t k = 0; k < out.size(); ++k) upstream[k] = scale * (out[k] - ys[i][k]);
        backward_accumulate(m.net, xs[i], upstream, grad);
      }
      for (double g : grad)
        if (!std::isfinite(g)) throw TrainingError("transition model training diverged", epoch);
      adam_update(m.net.params, grad, opt, cfg.lr);
    }
  }

  result.holdout_count = held.size();
  if (held.empty()) {
    result.holdout_mse = std::numeric_limits<double>::quiet_NaN();
  } else {
    double total = 0.0;
    for (const TransitionSample* s : held) total += squared_error(m, *s);
    result.holdout_mse = total / static_cast<double>(held.size());
  }
  return result;
}

double prediction_error(const TransitionModel& model, const std::vector<TransitionSample>& probe) {
  if (probe.empty()) throw DomainError("prediction error over an empty probe");
  double y = 0.0;
  for (const TransitionSample& s : probe) y += squared_error(model, s);
  return y;
}

SimilarityWeights similarity_weights(std::span<const double> ys, NormalizationMode mode, std::size_t m_g) {
  if (ys.empty()) throw DomainError("similarity weights need at least one score");
  for (double y : ys)
    if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("similarity scores must be finite and nonnegative");
  std::vector<double> logits(ys.size());
  if (mode.kind == NormalizationMode::Kind::RawSum) {
    for (std::size_t i = 0; i < ys.size(); ++i) logits[i] = -ys[i];
  } else {
    if (!(mode.tau > 0.0)) throw DomainError("per-sample-mean temperature must be positive");
    if (m_g == 0) throw DomainError("per-sample-mean normalization needs m_g >= 1");
    for (std::size_t i = 0; i < ys.size(); ++i) logits[i] = -(ys[i] / static_cast<double>(m_g)) / mode.tau;
  }
  return SimilarityWeights{softmax(logits), std::vector<double>(ys.begin(), ys.end()), mode};
}

SimilarityWeights uniform_weights(std::size_t n) {
  if (n == 0) throw DomainError("uniform weights over zero sources");
  return SimilarityWeights{std::vector<double>(n, 1.0 / static_cast<double>(n)), std::vector<double>(n, 0.0), {}};
}

void validate(const SimilarityWeights& w) {
  if (w.weights.empty()) throw DomainError("empty similarity weights");
  double total = 0.0;
  for (double v : w.weights) {
    if (!(v >= 0.0)) throw DomainError("similarity weights must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("similarity weights must sum to 1");
}

namespace {

constexpr char kMagic[9] = "CAROLTRM";
constexpr std::uint32_t kVersion = 1;

void write_normalizer(std::ostream& out, const Normalizer& n) {
  bin::put_u32(out, static_cast<std::uint32_t>(n.mean.size()));
  for (std::size_t k = 0; k < n.mean.size(); ++k) {
    bin::put_f64(out, n.mean[k]);
    bin::put_f64(out, n.std[k]);
  }
}

Normalizer read_normalizer(std::istream& in, std::size_t expected) {
  const std::uint32_t d = bin::get_u32(in);
  if (d != expected) throw DataError("normalizer width does not match the network");
  Normalizer n;
  for (std::uint32_t k = 0; k < d; ++k) {
    n.mean.push_back(bin::get_f64(in));
    n.std.push_back(bin::get_f64(in));
    if (!(n.std.back() > 0.0)) throw DataError("normalizer std must be positive");
  }
  return n;
}

}  // namespace

void write_transition_model(std::ostream& out, const TransitionModel& model) {
  bin::put_magic(out, kMagic);
  bin::put_u32(out, kVersion);
  bin::write_space(out, model.space);
  write_normalizer(out, model.input);
  write_normalizer(out, model.output);
  write_mlp(out, model.net);
  if (!out) throw IoError("failed writing transition model");
}

TransitionModel read_transition_model(std::istream& in) {
  bin::expect_magic(in, kMagic);
  if (const std::uint32_t version = bin::get_u32(in); version != kVersion)
    throw DataError("unsupported transition model version " + std::to_string(version));
  TransitionModel m;
  m.space = bin::read_space(in);
  const std::size_t in_width = static_cast<std::size_t>(m.state_dim() + m.action_dim());
  m.input = read_normalizer(in, in_width);
  m.output = read_normalizer(in, static_cast<std::size_t>(m.state_dim()));
  m.net = read_mlp(in);
  if (static_cast<std::size_t>(m.net.input_size()) != in_width || m.net.output_size() != m.state_dim())
    throw DataError("transition network shape does not match its spaces");
  return m;
}

void save_transition_model(const std::string& path, const TransitionModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_transition_model(out, model);
}

TransitionModel load_transition_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_transition_model(in);
}

}  // namespace carol
