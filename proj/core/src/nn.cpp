#include "carol/nn.hpp"

#include <algorithm>
#include <cmath>

#include "carol/error.hpp"
#include "carol/rng.hpp"

namespace carol {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Tanh: return std::tanh(z);
    case Activation::Identity: break;
  }
  return z;
}

// Derivative expressed through the pre-activation z and output y.
double activate_grad(Activation a, double z, double y) {
  switch (a) {
    case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: return 1.0 - y * y;
    case Activation::Identity: break;
  }
  return 1.0;
}

Activation layer_activation(const Mlp& mlp, std::size_t layer) {
  return layer + 1 == mlp.layer_count() ? mlp.output_activation : mlp.activations[layer];
}

void check_input(const Mlp& mlp, std::size_t n) {
  if (n != static_cast<std::size_t>(mlp.input_size()))
    throw DomainError("mlp input has " + std::to_string(n) + " entries, expected " +
                      std::to_string(mlp.input_size()));
}

struct Trace {
  std::vector<std::vector<double>> pre;   // per layer
  std::vector<std::vector<double>> post;  // post[0] is the input
};

Trace run(const Mlp& mlp, std::span<const double> x) {
  check_input(mlp, x.size());
  Trace t;
  const std::size_t n_layers = mlp.layer_count();
  t.pre.resize(n_layers);
  t.post.resize(n_layers + 1);
  t.post[0].assign(x.begin(), x.end());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = mlp.layer_sizes[l];
    const int out = mlp.layer_sizes[l + 1];
    const double* w = mlp.params.data() + offset;
    const double* b = w + static_cast<std::size_t>(in) * out;
    const std::vector<double>& a = t.post[l];
    std::vector<double>& z = t.pre[l];
    std::vector<double>& y = t.post[l + 1];
    z.resize(out);
    y.resize(out);
    const Activation act = layer_activation(mlp, l);
    for (int o = 0; o < out; ++o) {
      double s = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) s += row[i] * a[i];
      z[o] = s;
      y[o] = activate(act, s);
    }
    offset += static_cast<std::size_t>(in) * out + out;
  }
  return t;
}

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DomainError(std::string(what) + ": size " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

std::size_t param_count(const std::vector<int>& layer_sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    n += static_cast<std::size_t>(layer_sizes[l]) * layer_sizes[l + 1] + layer_sizes[l + 1];
  return n;
}

Mlp mlp_init(const std::vector<int>& layer_sizes, const std::vector<Activation>& activations,
             Activation output_activation, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw ConfigError("mlp needs at least two layer sizes");
  for (int s : layer_sizes)
    if (s <= 0) throw ConfigError("mlp layer sizes must be positive");
  if (activations.size() != layer_sizes.size() - 2)
    throw ConfigError("mlp needs one activation per hidden layer, got " + std::to_string(activations.size()));
  Mlp mlp{layer_sizes, activations, output_activation, std::vector<double>(param_count(layer_sizes), 0.0)};
  Rng rng(seed);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int in = layer_sizes[l];
    const int out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    const std::size_t n_w = static_cast<std::size_t>(in) * out;
    for (std::size_t k = 0; k < n_w; ++k) mlp.params[offset + k] = rng.uniform(-limit, limit);
    offset += n_w + out;
  }
  return mlp;
}

std::vector<double> forward(const Mlp& mlp, std::span<const double> x) {
  Trace t = run(mlp, x);
  return std::move(t.post.back());
}

void backward_accumulate(const Mlp& mlp, std::span<const double> x, std::span<const double> upstream,
                         std::span<double> param_grads, std::vector<double>* input_grad) {
  check_same_size(upstream.size(), static_cast<std::size_t>(mlp.output_size()), "mlp upstream gradient");
  check_same_size(param_grads.size(), mlp.params.size(), "mlp parameter gradient");
  const Trace t = run(mlp, x);
  const std::size_t n_layers = mlp.layer_count();

  std::vector<std::size_t> offsets(n_layers);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = offset;
    offset += static_cast<std::size_t>(mlp.layer_sizes[l]) * mlp.layer_sizes[l + 1] + mlp.layer_sizes[l + 1];
  }

  std::vector<double> delta(upstream.begin(), upstream.end());
  {
    const Activation act = mlp.output_activation;
    for (std::size_t o = 0; o < delta.size(); ++o)
      delta[o] *= activate_grad(act, t.pre.back()[o], t.post.back()[o]);
  }
  std::vector<double> da;
  for (std::size_t l = n_layers; l-- > 0;) {
    const int in = mlp.layer_sizes[l];
    const int out = mlp.layer_sizes[l + 1];
    const double* w = mlp.params.data() + offsets[l];
    double* gw = param_grads.data() + offsets[l];
    double* gb = gw + static_cast<std::size_t>(in) * out;
    const std::vector<double>& a = t.post[l];
    da.assign(in, 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w + static_cast<std::size_t>(o) * in;
      double* grow = gw + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) {
        grow[i] += d * a[i];
        da[i] += d * row[i];
      }
      gb[o] += d;
    }
    if (l == 0) break;
    const Activation act = mlp.activations[l - 1];
    delta.resize(in);
    for (int i = 0; i < in; ++i) delta[i] = da[i] * activate_grad(act, t.pre[l - 1][i], t.post[l][i]);
  }
  if (input_grad != nullptr) *input_grad = std::move(da);
}

MlpGradients backward(const Mlp& mlp, std::span<const double> x, std::span<const double> upstream) {
  MlpGradients g;
  g.params.assign(mlp.params.size(), 0.0);
  backward_accumulate(mlp, x, upstream, g.params, &g.input);
  return g;
}

void sgd_update(std::span<double> params, std::span<const double> grads, double lr) {
  check_same_size(grads.size(), params.size(), "sgd gradient");
  for (std::size_t k = 0; k < params.size(); ++k) params[k] -= lr * grads[k];
}

void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state, double lr) {
  check_same_size(grads.size(), params.size(), "adam gradient");
  check_same_size(state.first_moment.size(), params.size(), "adam first moment");
  check_same_size(state.second_moment.size(), params.size(), "adam second moment");
  ++state.step_count;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    double& m = state.first_moment[k];
    double& v = state.second_moment[k];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    params[k] -= lr * (m / c1) / (std::sqrt(v / c2) + state.eps);
  }
}

Mlp sgd_step(Mlp mlp, std::span<const double> grads, double lr) {
  sgd_update(mlp.params, grads, lr);
  return mlp;
}

Mlp adam_step(Mlp mlp, std::span<const double> grads, AdamState& state, double lr) {
  adam_update(mlp.params, grads, state, lr);
  return mlp;
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("softmax temperature must be positive");
  if (logits.empty()) throw DomainError("softmax of an empty vector");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) total += p[k] = std::exp((logits[k] - top) / temperature);
  for (double& v : p) v /= total;
  return p;
}

namespace {

std::vector<double> log_softmax(std::span<const double> logits, double temperature) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double l : logits) total += std::exp((l - top) / temperature);
  const double log_z = std::log(total);
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (logits[k] - top) / temperature - log_z;
  return out;
}

}  // namespace

double kl_softmax(std::span<const double> teacher_logits, std::span<const double> student_logits,
                  double temperature) {
  check_same_size(teacher_logits.size(), student_logits.size(), "kl_softmax logits");
  if (!(temperature > 0.0)) throw DomainError("kl temperature must be positive");
  if (teacher_logits.empty()) throw DomainError("kl_softmax of empty logits");
  const std::vector<double> lt = log_softmax(teacher_logits, temperature);
  const std::vector<double> ls = log_softmax(student_logits, 1.0);
  double kl = 0.0;
  for (std::size_t k = 0; k < lt.size(); ++k) {
    const double pt = std::exp(lt[k]);
    if (pt > 0.0) kl += pt * (lt[k] - ls[k]);
  }
  return std::max(kl, 0.0);
}

std::vector<double> kl_softmax_grad(std::span<const double> teacher_logits, std::span<const double> student_logits,
                                    double temperature) {
  check_same_size(teacher_logits.size(), student_logits.size(), "kl_softmax logits");
  const std::vector<double> pt = softmax(teacher_logits, temperature);
  std::vector<double> g = softmax(student_logits, 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] -= pt[k];
  return g;
}

GaussianKl kl_gaussian_with_grad(std::span<const double> teacher_mean, std::span<const double> teacher_log_std,
                                 std::span<const double> student_mean, std::span<const double> student_log_std) {
  const std::size_t n = teacher_mean.size();
  check_same_size(teacher_log_std.size(), n, "kl_gaussian teacher");
  check_same_size(student_mean.size(), n, "kl_gaussian student mean");
  check_same_size(student_log_std.size(), n, "kl_gaussian student log std");
  GaussianKl out;
  out.d_student_mean.resize(n);
  out.d_student_log_std.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    const double var_t = std::exp(2.0 * teacher_log_std[d]);
    const double inv_var_s = std::exp(-2.0 * student_log_std[d]);
    const double diff = teacher_mean[d] - student_mean[d];
    const double ratio = (var_t + diff * diff) * inv_var_s;
    out.value += student_log_std[d] - teacher_log_std[d] + 0.5 * ratio - 0.5;
    out.d_student_mean[d] = -diff * inv_var_s;
    out.d_student_log_std[d] = 1.0 - ratio;
  }
  return out;
}

double kl_gaussian(std::span<const double> teacher_mean, std::span<const double> teacher_log_std,
                   std::span<const double> student_mean, std::span<const double> student_log_std) {
  return std::max(kl_gaussian_with_grad(teacher_mean, teacher_log_std, student_mean, student_log_std).value, 0.0);
}

}  // namespace carol
