#include "carol/harness/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>

#include <json.hpp>

#include "carol/baselines.hpp"
#include "carol/error.hpp"
#include "carol/harness/digest.hpp"
#include "carol/harness/manifest.hpp"
#include "carol/harness/results.hpp"
#include "carol/rng.hpp"
#include "carol/source_training.hpp"

namespace carol::harness {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Log {
 public:
  explicit Log(std::ostream* out) : out_(out) {}
  template <class... Ts>
  void operator()(const Ts&... parts) const {
    if (out_ == nullptr) return;
    ((*out_) << ... << parts) << '\n';
    out_->flush();
  }

 private:
  std::ostream* out_;
};

std::string knowledge_path(const std::string& name) { return "sources/" + name + ".knw"; }
std::string model_path(const std::string& name) { return "models/" + name + ".trm"; }

struct LoadedSources {
  ExperimentManifest manifest;
  std::vector<Knowledge> knowledge;
  std::vector<TransitionModel> models;
};

LoadedSources load_sources(const ExperimentConfig& cfg, const std::string& dir) {
  LoadedSources out;
  out.manifest = load_manifest(dir);
  if (out.manifest.sources_sha256 != sha256_hex(cfg.sources_canonical))
    throw ConfigError("sources, knowledge or context settings differ from those recorded in '" +
                      (fs::path(dir) / kManifestFile).string() + "'; rerun train-sources");
  for (const SourceConfig& s : cfg.sources) {
    out.knowledge.push_back(
        load_knowledge((fs::path(dir) / find_artifact(out.manifest, "knowledge", s.name).path).string()));
    out.models.push_back(load_transition_model(
        (fs::path(dir) / find_artifact(out.manifest, "transition_model", s.name).path).string()));
  }
  return out;
}

std::vector<double> scores(const std::vector<TransitionModel>& models, const std::vector<TransitionSample>& probe) {
  std::vector<double> ys;
  ys.reserve(models.size());
  for (const TransitionModel& m : models) ys.push_back(prediction_error(m, probe));
  return ys;
}

enum class SourceKind { Policy, Value, ActorCritic };

struct SourceSets {
  SourceKind kind = SourceKind::Value;
  std::vector<Policy> policies;
  std::vector<QFunction> qs;
  std::vector<NetworkQ> critics;
};

SourceSets split_sources(const std::vector<Knowledge>& ks) {
  SourceSets s;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const SourceKind kind = std::visit(
        [&s](const auto& body) {
          using B = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<B, PolicyK>) {
            s.policies.push_back(body.policy);
            return SourceKind::Policy;
          } else if constexpr (std::is_same_v<B, ValueK>) {
            s.qs.push_back(body.q);
            return SourceKind::Value;
          } else {
            s.policies.push_back(body.policy);
            const auto* critic = std::get_if<NetworkQ>(&body.q);
            if (critic == nullptr) throw UnsupportedError("actor-critic adaptation needs network critics");
            s.critics.push_back(*critic);
            return SourceKind::ActorCritic;
          }
        },
        ks[i].body);
    if (i == 0) s.kind = kind;
    else if (kind != s.kind) throw DataError("all sources must hold the same knowledge kind");
  }
  return s;
}

std::string run_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

json run_inputs(const ExperimentConfig& cfg, const LoadedSources& src, Method method, std::uint64_t seed,
                const std::optional<std::string>& weights_digest) {
  json config = json::parse(cfg.canonical);
  config.erase("seeds");
  config.erase("methods");
  config.erase("weights_file");
  json artifacts = json::array();
  for (const Artifact& a : src.manifest.artifacts) artifacts.push_back(a.sha256);
  return json{{"config", config},
              {"method", method_name(method)},
              {"seed", seed},
              {"artifacts", artifacts},
              {"weights_override", weights_digest ? json(*weights_digest) : json(nullptr)}};
}

bool run_is_complete(const fs::path& dir, const std::string& input_sha) {
  const fs::path meta = dir / "run.json";
  if (!fs::exists(meta)) return false;
  try {
    const json doc = json::parse(read_file(meta.string()));
    if (doc.at("input_sha256") != input_sha) return false;
    const fs::path out = dir / doc.at("output").get<std::string>();
    return fs::exists(out) && file_sha256(out.string()) == doc.at("output_sha256").get<std::string>();
  } catch (const json::exception&) {
    return false;
  }
}

Table sk_table(const std::vector<std::string>& names, const std::vector<EvalStats>& stats) {
  Table t;
  t.columns = {"source", "mean_return", "std_return", "episodes"};
  for (std::size_t i = 0; i < names.size(); ++i)
    t.rows.push_back(
        {names[i], format_double(stats[i].mean), format_double(stats[i].std), std::to_string(stats[i].episodes)});
  return t;
}

std::uint64_t parse_seed_dir(const std::string& name) {
  std::uint64_t v = 0;
  const std::string_view digits = std::string_view(name).substr(5);
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (name.rfind("seed_", 0) != 0 || ec != std::errc() || end != digits.data() + digits.size())
    throw DataError("unexpected run directory '" + name + "'");
  return v;
}

std::vector<fs::path> seed_dirs(const fs::path& method_dir) {
  std::vector<std::pair<std::uint64_t, fs::path>> dirs;
  for (const auto& e : fs::directory_iterator(method_dir))
    if (e.is_directory()) dirs.emplace_back(parse_seed_dir(e.path().filename().string()), e.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<fs::path> out;
  for (auto& d : dirs) out.push_back(std::move(d.second));
  return out;
}

}  // namespace

Quartiles quartiles(std::vector<double> xs) {
  if (xs.empty()) throw DataError("quartiles of an empty sample");
  std::sort(xs.begin(), xs.end());
  auto at = [&xs](double q) {
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return frac == 0.0 ? xs[lo] : xs[lo] + frac * (xs[hi] - xs[lo]);
  };
  return Quartiles{at(0.25), at(0.5), at(0.75)};
}

Knowledge train_source(const SourceConfig& src, const KnowledgeConfig& k, std::size_t index) {
  const TaskHandle task = src.env.make();
  const std::uint64_t i = index;
  auto tabular = [&](QTable q) {
    if (k.as_policy) return Knowledge{PolicyK{greedy_policy(q)}, task.space()};
    return Knowledge{ValueK{std::move(q)}, task.space()};
  };
  switch (k.trainer) {
    case SourceTrainer::ValueIteration:
      return tabular(value_iteration(task, k.q.gamma));
    case SourceTrainer::QLearning: {
      TrainConfig c = k.q;
      c.seed = derive_seed({k.q.seed, i});
      return tabular(train_q_tabular(task, c));
    }
    case SourceTrainer::PolicyGradient:
    case SourceTrainer::ActorCritic: {
      PolicyGradientConfig c = k.pg;
      c.seed = derive_seed({k.pg.seed, i});
      NetConfig actor = k.actor;
      actor.seed = derive_seed({k.actor.seed, i, 0xa});
      NetConfig critic = k.critic;
      critic.seed = derive_seed({k.critic.seed, i, 0xc});
      PolicyGradientResult r = train_policy_gradient(task, actor, critic, c);
      if (k.trainer == SourceTrainer::PolicyGradient) return Knowledge{PolicyK{std::move(r.policy)}, task.space()};
      return Knowledge{ActorCriticK{std::move(r.policy), std::move(r.critic)}, task.space()};
    }
  }
  throw ConfigError("unknown source trainer");
}

void train_sources(const ExperimentConfig& cfg, const RunOptions& opts) {
  const Log log(opts.log);
  const fs::path dir(opts.out_dir);
  ExperimentManifest m;
  m.experiment_id = cfg.experiment_id;
  m.config = cfg.canonical;
  m.sources_sha256 = sha256_hex(cfg.sources_canonical);
  for (Method meth : cfg.methods) m.methods.emplace_back(method_name(meth));
  m.seeds = cfg.seeds;

  for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
    const SourceConfig& s = cfg.sources[i];
    const TaskHandle task = s.env.make();
    const Knowledge k = train_source(s, cfg.knowledge, i);
    const EvalStats e = evaluate_knowledge(task, k, cfg.sk_episodes, derive_seed({cfg.context.seed, 0x5cULL, i}));

    const auto probe =
        collect_probe(task, UniformRandomProbe{}, cfg.context.m_g, derive_seed({cfg.context.seed, 0x9bULL, i}));
    FitConfig fit = cfg.context.fit;
    fit.seed = derive_seed({cfg.context.fit.seed, i});
    const FitResult r = fit_transition_model(task.space(), probe, fit);

    const std::string kp = knowledge_path(s.name), mp = model_path(s.name);
    fs::create_directories(dir / "sources");
    fs::create_directories(dir / "models");
    save_knowledge((dir / kp).string(), k);
    save_transition_model((dir / mp).string(), r.model);
    m.artifacts.push_back(Artifact{"knowledge", s.name, kp, file_sha256((dir / kp).string())});
    m.artifacts.push_back(Artifact{"transition_model", s.name, mp, file_sha256((dir / mp).string())});
    log("source ", s.name, ": ", knowledge_kind_name(k), " return ", format_double(e.mean), " +- ",
        format_double(e.std), ", model holdout mse ", format_double(r.holdout_mse));
  }
  save_manifest(dir.string(), m);
  log("wrote ", (dir / kManifestFile).string());
}

SimilarityWeights target_weights(const std::vector<TransitionModel>& models, const TaskHandle& target,
                                 const ContextConfig& ctx, std::uint64_t seed) {
  const auto probe = collect_probe(target, UniformRandomProbe{}, ctx.m_g, derive_seed({seed, 0x51ULL}));
  return similarity_weights(scores(models, probe), ctx.normalization, ctx.m_g);
}

SimilarityTable similarity(const ExperimentConfig& cfg, const RunOptions& opts) {
  const Log log(opts.log);
  const LoadedSources src = load_sources(cfg, opts.out_dir);
  SimilarityTable t;
  std::vector<TaskHandle> rows{cfg.target.make()};
  t.rows.emplace_back("target");
  for (const SourceConfig& s : cfg.sources) {
    t.sources.push_back(s.name);
    t.rows.push_back(s.name);
    rows.push_back(s.env.make());
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::uint64_t seed = derive_seed({cfg.context.seed, 0x51ULL, static_cast<std::uint64_t>(r)});
    const SimilarityWeights w = target_weights(src.models, rows[r], cfg.context, seed);
    t.weights.push_back(w.weights);
    t.scores.push_back(w.raw_scores);
  }

  Table out;
  out.columns.emplace_back("task");
  for (const auto& s : t.sources) out.columns.push_back("w_" + s);
  for (const auto& s : t.sources) out.columns.push_back("y_" + s);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<std::string> row{t.rows[r]};
    for (double w : t.weights[r]) row.push_back(format_double(w));
    for (double y : t.scores[r]) row.push_back(format_double(y));
    out.rows.push_back(std::move(row));
  }
  const std::string path = (fs::path(opts.out_dir) / "similarity.csv").string();
  write_table(path, out);
  log(render_table(out), "wrote ", path);
  return t;
}

AdaptSummary adapt(const ExperimentConfig& cfg, const RunOptions& opts) {
  const Log log(opts.log);
  const LoadedSources src = load_sources(cfg, opts.out_dir);
  const SourceSets sets = split_sources(src.knowledge);
  const TaskHandle target = cfg.target.make();
  const std::vector<std::uint64_t> seeds = opts.seeds ? *opts.seeds : cfg.seeds;
  if (seeds.empty()) throw ConfigError("seed list is empty");
  const std::vector<Method> methods = opts.method ? std::vector<Method>{*opts.method} : cfg.methods;

  std::optional<SimilarityWeights> override_w;
  std::optional<std::string> override_digest;
  if (cfg.weights_file) {
    std::vector<double> w = load_weights_file(*cfg.weights_file);
    if (w.size() != cfg.sources.size())
      throw ConfigError("weights_file has " + std::to_string(w.size()) + " weights for " +
                        std::to_string(cfg.sources.size()) + " sources");
    override_w = SimilarityWeights{std::move(w), {}, cfg.context.normalization};
    validate(*override_w);
    override_digest = file_sha256(*cfg.weights_file);
  }
  std::vector<std::string> names;
  for (const SourceConfig& s : cfg.sources) names.push_back(s.name);

  AdaptSummary summary;
  for (Method method : methods) {
    if (method == Method::Pd && sets.kind == SourceKind::Value)
      throw UnsupportedError("method pd needs policy sources; these sources are Q functions");
    if (method == Method::CarolPlus && !(cfg.adapt.carol_plus_weight > 0.0))
      throw ConfigError("method carol_plus needs adapt.carol_plus_weight > 0");
    for (std::uint64_t seed : seeds) {
      const fs::path dir = fs::path(opts.out_dir) / "runs" / std::string(method_name(method)) / run_dir_name(seed);
      const std::string input_sha = sha256_hex(run_inputs(cfg, src, method, seed, override_digest).dump());
      if (run_is_complete(dir, input_sha)) {
        ++summary.skipped;
        log(method_name(method), " seed ", seed, ": up to date");
        continue;
      }

      AdaptConfig a = cfg.adapt;
      a.seed = seed;
      if (method != Method::CarolPlus) a.carol_plus_weight = 0.0;
      NetConfig student = cfg.student.policy;
      student.seed = derive_seed({student.seed, seed});
      QModelConfig qm = cfg.student.q;
      qm.net.seed = derive_seed({qm.net.seed, seed});

      SimilarityWeights w;
      if (method == Method::Carol || method == Method::CarolPlus)
        w = override_w ? *override_w : target_weights(src.models, target, cfg.context, seed);

      std::string output;
      std::string rendered;
      if (method == Method::Sk) {
        output = "sk.csv";
        rendered = render_table(sk_table(names, sk_eval(src.knowledge, target, cfg.sk_episodes, seed)));
      } else {
        LearningCurve curve;
        if (method == Method::Lfs) {
          curve = sets.kind == SourceKind::Value ? lfs_train(target, qm, a).curve : lfs_train(target, student, a).curve;
        } else if (method == Method::Pd) {
          curve = pd_adapt(sets.policies, target, student, a).curve;
        } else if (sets.kind == SourceKind::Value) {
          curve = carol_value_adapt(sets.qs, w, target, qm, a).curve;
        } else if (sets.kind == SourceKind::Policy) {
          curve = carol_policy_adapt(sets.policies, w, target, student, a).curve;
        } else {
          curve = carol_ac_adapt(sets.policies, sets.critics, w, target, student, a).curve;
        }
        output = "curve.csv";
        rendered = render_table(curve_table(curve));
        log(method_name(method), " seed ", seed, ": final return ", format_double(curve.back().mean_return));
      }
      write_file((dir / output).string(), rendered);
      const json meta = {{"method", method_name(method)},
                         {"seed", seed},
                         {"input_sha256", input_sha},
                         {"output", output},
                         {"output_sha256", sha256_hex(rendered)},
                         {"weights", w.weights}};
      write_file((dir / "run.json").string(), meta.dump(2) + "\n");
      ++summary.completed;
    }
  }
  return summary;
}

void report(const std::string& dir_str, std::ostream* log_out) {
  const Log log(log_out);
  const fs::path dir(dir_str);
  const fs::path runs = dir / "runs";
  if (!fs::is_directory(runs)) throw IoError("no runs directory under '" + dir_str + "'");
  std::vector<std::string> methods;
  for (const auto& e : fs::directory_iterator(runs))
    if (e.is_directory()) methods.push_back(e.path().filename().string());
  std::sort(methods.begin(), methods.end());

  Table summary;
  summary.columns = {"method", "seeds", "final_median", "final_q25", "final_q75"};
  for (const std::string& method : methods) {
    const auto seeds = seed_dirs(runs / method);
    if (seeds.empty()) continue;
    if (method == "sk") {
      std::map<std::string, std::vector<double>> by_source;
      std::vector<std::string> order;
      for (const fs::path& s : seeds) {
        const Table t = read_table((s / "sk.csv").string());
        for (const auto& row : t.rows) {
          if (!by_source.contains(row[0])) order.push_back(row[0]);
          double v = 0.0;
          std::from_chars(row[1].data(), row[1].data() + row[1].size(), v);
          by_source[row[0]].push_back(v);
        }
      }
      for (const std::string& name : order) {
        const Quartiles q = quartiles(by_source[name]);
        summary.rows.push_back({"sk:" + name, std::to_string(by_source[name].size()), format_double(q.median),
                                format_double(q.q25), format_double(q.q75)});
      }
      continue;
    }
    std::vector<LearningCurve> curves;
    for (const fs::path& s : seeds) curves.push_back(read_curve_csv((s / "curve.csv").string()));
    for (const LearningCurve& c : curves)
      if (c.size() != curves.front().size() || c.empty())
        throw DataError("curves of method '" + method + "' differ in length");
    Table agg;
    agg.columns = {"iteration", "episodes_seen", "median_return", "q25_return", "q75_return"};
    for (std::size_t i = 0; i < curves.front().size(); ++i) {
      std::vector<double> returns, episodes;
      for (const LearningCurve& c : curves) {
        returns.push_back(c[i].mean_return);
        episodes.push_back(static_cast<double>(c[i].episodes_seen));
      }
      const Quartiles q = quartiles(returns);
      agg.rows.push_back({std::to_string(curves.front()[i].iteration), format_double(quartiles(episodes).median),
                          format_double(q.median), format_double(q.q25), format_double(q.q75)});
    }
    write_table((dir / "report" / (method + "_curve.csv")).string(), agg);
    std::vector<double> finals;
    for (const LearningCurve& c : curves) finals.push_back(c.back().mean_return);
    const Quartiles q = quartiles(finals);
    summary.rows.push_back({method, std::to_string(curves.size()), format_double(q.median), format_double(q.q25),
                            format_double(q.q75)});
  }
  const std::string path = (dir / "report" / "summary.csv").string();
  write_table(path, summary);
  log(render_table(summary), "wrote ", path);
}

}  // namespace carol::harness
