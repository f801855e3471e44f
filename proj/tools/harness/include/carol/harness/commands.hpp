#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "carol/context.hpp"
#include "carol/harness/config.hpp"
#include "carol/knowledge.hpp"

namespace carol::harness {

struct RunOptions {
  std::string out_dir;
  std::optional<std::vector<std::uint64_t>> seeds;  // overrides cfg.seeds
  std::optional<Method> method;                     // restricts cfg.methods
  std::ostream* log = nullptr;
};

/// Trains every source, fits its transition model on a uniform-random probe
/// and writes sources/<name>.knw, models/<name>.trm and manifest.json.
void train_sources(const ExperimentConfig& cfg, const RunOptions& opts);

struct SimilarityTable {
  std::vector<std::string> sources;          // columns
  std::vector<std::string> rows;             // "target" then each source used as a target
  std::vector<std::vector<double>> weights;  // rows x sources
  std::vector<std::vector<double>> scores;   // raw prediction errors Y
};

/// Scores the target and every source task against all source models and
/// writes similarity.csv.
SimilarityTable similarity(const ExperimentConfig& cfg, const RunOptions& opts);

struct AdaptSummary {
  int completed = 0;
  int skipped = 0;  // already complete with matching input digest
};

/// Runs each (method, seed) pair into runs/<method>/seed_<seed>/.
AdaptSummary adapt(const ExperimentConfig& cfg, const RunOptions& opts);

/// Aggregates runs/ under dir into report/<method>_curve.csv (median and
/// quartiles per iteration) and report/summary.csv.
void report(const std::string& dir, std::ostream* log = nullptr);

/// Weights for the target under a run seed: a fresh uniform-random probe of
/// m_g samples scored by every model.
SimilarityWeights target_weights(const std::vector<TransitionModel>& models, const TaskHandle& target,
                                 const ContextConfig& ctx, std::uint64_t seed);

/// Source knowledge as produced by train-sources for source index i.
Knowledge train_source(const SourceConfig& src, const KnowledgeConfig& k, std::size_t index);

/// Median and quartiles by linear interpolation between order statistics.
struct Quartiles {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};
Quartiles quartiles(std::vector<double> xs);

}  // namespace carol::harness
