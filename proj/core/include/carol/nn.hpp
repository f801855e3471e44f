#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace carol {

enum class Activation : std::uint8_t { Identity = 0, ReLU = 1, Tanh = 2 };

/// Fully connected network. params holds, per layer, the row-major weight
/// matrix (out x in) followed by the bias vector.
struct Mlp {
  std::vector<int> layer_sizes;
  std::vector<Activation> activations;  // one per hidden layer
  Activation output_activation = Activation::Identity;
  std::vector<double> params;

  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }
  bool operator==(const Mlp&) const = default;
};

std::size_t param_count(const std::vector<int>& layer_sizes);

/// Glorot-uniform weights, zero biases, drawn deterministically from seed.
Mlp mlp_init(const std::vector<int>& layer_sizes, const std::vector<Activation>& activations,
             Activation output_activation, std::uint64_t seed);

std::vector<double> forward(const Mlp& mlp, std::span<const double> x);

struct MlpGradients {
  std::vector<double> params;
  std::vector<double> input;
};

/// Gradients of dot(upstream, forward(x)) w.r.t. params and x.
MlpGradients backward(const Mlp& mlp, std::span<const double> x, std::span<const double> upstream);

/// As backward, but adds the parameter gradient into param_grads. input_grad
/// may be null when the caller does not need it.
void backward_accumulate(const Mlp& mlp, std::span<const double> x, std::span<const double> upstream,
                         std::span<double> param_grads, std::vector<double>* input_grad = nullptr);

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zeros(std::size_t n) { return AdamState{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }
};

/// In-place updates on a raw parameter vector.
void sgd_update(std::span<double> params, std::span<const double> grads, double lr);
void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state, double lr);

Mlp sgd_step(Mlp mlp, std::span<const double> grads, double lr);
/// Updates state in place and returns the stepped network.
Mlp adam_step(Mlp mlp, std::span<const double> grads, AdamState& state, double lr);

std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);

/// KL(softmax(teacher / T) || softmax(student)).
double kl_softmax(std::span<const double> teacher_logits, std::span<const double> student_logits,
                  double temperature = 1.0);
/// Gradient of kl_softmax w.r.t. the student logits.
std::vector<double> kl_softmax_grad(std::span<const double> teacher_logits, std::span<const double> student_logits,
                                    double temperature = 1.0);

struct GaussianKl {
  double value = 0.0;
  std::vector<double> d_student_mean;
  std::vector<double> d_student_log_std;
};

/// KL(teacher || student) for diagonal Gaussians, summed over dimensions.
double kl_gaussian(std::span<const double> teacher_mean, std::span<const double> teacher_log_std,
                   std::span<const double> student_mean, std::span<const double> student_log_std);
GaussianKl kl_gaussian_with_grad(std::span<const double> teacher_mean, std::span<const double> teacher_log_std,
                                 std::span<const double> student_mean, std::span<const double> student_log_std);

/// Binary format: magic, layer sizes, activation codes, then the params as
/// little-endian doubles.
void write_mlp(std::ostream& out, const Mlp& mlp);
Mlp read_mlp(std::istream& in);

}  // namespace carol
