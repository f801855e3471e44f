#pragma once

#include <variant>
#include <vector>

#include "carol/adaptation.hpp"

namespace carol {

/// Policy distillation: carol_policy_adapt with uniform weights.
PolicyAdaptResult pd_adapt(const std::vector<Policy>& teachers, const TaskHandle& target,
                           const NetConfig& student_config, const AdaptConfig& cfg,
                           const ParamObserver& observer = {});

/// A network policy config selects policy-gradient training; a Q model
/// config selects TD learning. Both reuse the adapters' loops and cadence.
using LfsStudent = std::variant<NetConfig, QModelConfig>;

struct LfsResult {
  Knowledge knowledge;
  LearningCurve curve;
};

LfsResult lfs_train(const TaskHandle& target, const LfsStudent& student_config, const AdaptConfig& cfg);

inline constexpr int kSkEpisodes = 20;

/// evaluate_knowledge for each source on the target.
std::vector<EvalStats> sk_eval(const std::vector<Knowledge>& sources, const TaskHandle& target,
                               int n_episodes = kSkEpisodes, std::uint64_t seed = 0);

}  // namespace carol
