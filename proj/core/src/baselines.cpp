#include "carol/baselines.hpp"

#include "carol/error.hpp"

namespace carol {

PolicyAdaptResult pd_adapt(const std::vector<Policy>& teachers, const TaskHandle& target,
                           const NetConfig& student_config, const AdaptConfig& cfg, const ParamObserver& observer) {
  if (teachers.empty()) throw ConfigError("policy distillation needs at least one teacher");
  return carol_policy_adapt(teachers, uniform_weights(teachers.size()), target, student_config, cfg, observer);
}

LfsResult lfs_train(const TaskHandle& target, const LfsStudent& student_config, const AdaptConfig& cfg) {
  const SimilarityWeights none = uniform_weights(1);
  if (const auto* net = std::get_if<NetConfig>(&student_config)) {
    detail::PolicyLoopTerms terms;
    terms.carol_weight = 0.0;
    terms.standard_weight = 1.0;
    PolicyAdaptResult r = detail::policy_loop(terms, none, target, *net, cfg, {});
    return LfsResult{Knowledge{PolicyK{std::move(r.student)}, target.space()}, std::move(r.curve)};
  }
  ValueAdaptResult r =
      detail::value_loop(nullptr, none, 0.0, 1.0, target, std::get<QModelConfig>(student_config), cfg, {});
  return LfsResult{Knowledge{ValueK{std::move(r.q)}, target.space()}, std::move(r.curve)};
}

std::vector<EvalStats> sk_eval(const std::vector<Knowledge>& sources, const TaskHandle& target, int n_episodes,
                               std::uint64_t seed) {
  std::vector<EvalStats> out;
  out.reserve(sources.size());
  for (const Knowledge& k : sources) out.push_back(evaluate_knowledge(target, k, n_episodes, seed));
  return out;
}

}  // namespace carol
