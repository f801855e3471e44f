#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "carol/knowledge.hpp"
#include "carol/task.hpp"

namespace carol {

/// Source of actions while probing a task.
struct UniformRandomProbe {};
using ProbePolicy = std::variant<UniformRandomProbe, Knowledge>;

/// Exactly m_g samples from as many seeded episodes as needed. Knowledge
/// probes sample from the policy (greedy over Q for value knowledge).
std::vector<TransitionSample> collect_probe(const TaskHandle& task, const ProbePolicy& probe, std::size_t m_g,
                                            std::uint64_t seed);

struct Normalizer {
  std::vector<double> mean;
  std::vector<double> std;  // floored at kMinStd
  bool operator==(const Normalizer&) const = default;
};

inline constexpr double kMinStd = 1e-6;

/// Learned next-state predictor over normalized inputs and targets.
struct TransitionModel {
  SpaceSpec space;
  Mlp net;
  Normalizer input;
  Normalizer output;

  int state_dim() const { return space.state_dim; }
  int action_dim() const { return action_width(space.action); }
  /// Next-state prediction in original units.
  std::vector<double> predict(std::span<const double> state, const Action& action) const;
  bool operator==(const TransitionModel&) const = default;
};

struct FitConfig {
  NetConfig net{{64, 64}, Activation::ReLU, 0};
  int epochs = 50;
  double lr = 1e-3;
  int minibatch_size = 64;
  double holdout_frac = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr std::size_t kMinFitSamples = 10;

struct FitResult {
  TransitionModel model;
  double holdout_mse = 0.0;  // mean squared error per held-out sample; NaN without a holdout
  std::size_t holdout_count = 0;
};

std::uint64_t sample_hash(const TransitionSample& sample);

/// Holdout mask for samples. Membership of a sample depends on its contents,
/// how many identical samples precede it and the seed, so reordering the
/// input permutes the mask along with it (as a multiset).
std::vector<bool> holdout_mask(const std::vector<TransitionSample>& samples, double holdout_frac, std::uint64_t seed);

FitResult fit_transition_model(const SpaceSpec& space, const std::vector<TransitionSample>& samples,
                               const FitConfig& cfg);

/// Sum over the probe of squared Euclidean prediction errors, original units.
double prediction_error(const TransitionModel& model, const std::vector<TransitionSample>& probe);

struct NormalizationMode {
  enum class Kind { RawSum, PerSampleMean } kind = Kind::RawSum;
  double tau = 1.0;  // PerSampleMean only

  static NormalizationMode raw_sum() { return {}; }
  static NormalizationMode per_sample_mean(double tau) { return {Kind::PerSampleMean, tau}; }
  bool operator==(const NormalizationMode&) const = default;
};

struct SimilarityWeights {
  std::vector<double> weights;
  std::vector<double> raw_scores;
  NormalizationMode mode;

  std::size_t size() const { return weights.size(); }
};

/// softmax(-Y) for RawSum, softmax(-(Y / m_g) / tau) for PerSampleMean.
SimilarityWeights similarity_weights(std::span<const double> ys, NormalizationMode mode = {}, std::size_t m_g = 1);

/// Uniform weights, as used by policy distillation.
SimilarityWeights uniform_weights(std::size_t n);

/// Throws DomainError unless weights are nonnegative and sum to 1 within 1e-9.
void validate(const SimilarityWeights& w);

void write_transition_model(std::ostream& out, const TransitionModel& model);
TransitionModel read_transition_model(std::istream& in);
void save_transition_model(const std::string& path, const TransitionModel& model);
TransitionModel load_transition_model(const std::string& path);

}  // namespace carol
