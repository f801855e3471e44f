#include "carol/harness/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "carol/envs.hpp"
#include "carol/error.hpp"

namespace carol::harness {

using json = nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError("field '" + path + "' " + what);
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "must be a number");
  return j.get<double>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) bad(path, "must be true or false");
  return j.get<bool>();
}

long as_long(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "must be an integer");
  return j.get<long>();
}

int as_int(const json& j, const std::string& path) {
  const long v = as_long(j, path);
  if (v < INT32_MIN || v > INT32_MAX) bad(path, "is out of range");
  return static_cast<int>(v);
}

std::uint64_t as_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) bad(path, "must be a nonnegative integer");
  return j.get<std::uint64_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "must be a string");
  return j.get<std::string>();
}

// Object view that remembers which keys were read so leftovers can be
// reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_.empty() ? "<root>" : path_, "must be an object");
  }
  std::string path(std::string_view key) const { return join(path_, key); }

  const json* find(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& need(const char* key) {
    const json* v = find(key);
    if (v == nullptr) throw ConfigError("missing field '" + path(key) + "'");
    return *v;
  }

  void get(const char* key, bool& out) { if (auto* v = find(key)) out = as_bool(*v, path(key)); }
  void get(const char* key, double& out) { if (auto* v = find(key)) out = as_double(*v, path(key)); }
  void get(const char* key, int& out) { if (auto* v = find(key)) out = as_int(*v, path(key)); }
  void get(const char* key, long& out) { if (auto* v = find(key)) out = as_long(*v, path(key)); }
  void get(const char* key, std::uint64_t& out) { if (auto* v = find(key)) out = as_u64(*v, path(key)); }

  double need_double(const char* key) { return as_double(need(key), path(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.contains(it.key())) throw ConfigError("unknown field '" + path(it.key()) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> used_;
};

Cell parse_cell(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) bad(path, "must be an [x, y] pair");
  return Cell{as_int(j[0], path + "[0]"), as_int(j[1], path + "[1]")};
}

Activation parse_activation(const json& j, const std::string& path) {
  const std::string s = as_string(j, path);
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::ReLU;
  if (s == "tanh") return Activation::Tanh;
  bad(path, "must be one of identity, relu, tanh");
}

NetConfig parse_net(const json& j, const std::string& path, NetConfig net) {
  Fields f(j, path);
  if (auto* h = f.find("hidden")) {
    if (!h->is_array()) bad(f.path("hidden"), "must be an array of layer widths");
    net.hidden.clear();
    for (std::size_t i = 0; i < h->size(); ++i) {
      const int w = as_int((*h)[i], f.path("hidden") + "[" + std::to_string(i) + "]");
      if (w <= 0) bad(f.path("hidden"), "widths must be positive");
      net.hidden.push_back(w);
    }
  }
  if (auto* a = f.find("activation")) net.activation = parse_activation(*a, f.path("activation"));
  f.get("seed", net.seed);
  f.finish();
  return net;
}

EpsilonSchedule parse_epsilon(const json& j, const std::string& path) {
  EpsilonSchedule e;
  Fields f(j, path);
  f.get("start", e.start);
  f.get("end", e.end);
  f.get("decay_episodes", e.decay_episodes);
  f.finish();
  try {
    e.validate();
  } catch (const ConfigError& err) {
    bad(path, err.what());
  }
  return e;
}

EnvConfig parse_env(const json& j, const std::string& path) {
  Fields f(j, path);
  EnvConfig env;
  const std::string kind = as_string(f.need("kind"), f.path("kind"));
  if (kind == "gridslip") {
    GridSlipSpec s;
    f.get("width", s.width);
    f.get("height", s.height);
    if (auto* v = f.find("start")) s.start = parse_cell(*v, f.path("start"));
    if (auto* v = f.find("goal")) s.goal = parse_cell(*v, f.path("goal"));
    if (auto* v = f.find("pits")) {
      if (!v->is_array()) bad(f.path("pits"), "must be an array of [x, y] pairs");
      for (std::size_t i = 0; i < v->size(); ++i)
        s.pits.push_back(parse_cell((*v)[i], f.path("pits") + "[" + std::to_string(i) + "]"));
    }
    s.slip_p = f.need_double("slip_p");
    f.get("step_reward", s.step_reward);
    f.get("goal_reward", s.goal_reward);
    f.get("pit_reward", s.pit_reward);
    env.spec = s;
    env.episode_cap = 100;
  } else if (kind == "frictioncar") {
    FrictionCarSpec s;
    s.friction_mu = f.need_double("friction_mu");
    f.get("thrust_gain", s.thrust_gain);
    f.get("dt", s.dt);
    f.get("track_length", s.track_length);
    f.get("velocity_cap", s.velocity_cap);
    f.get("crash_reward", s.crash_reward);
    env.spec = s;
    env.episode_cap = 200;
  } else if (kind == "windylander") {
    WindyLanderSpec s;
    s.gravity_g = f.need_double("gravity_g");
    s.wind_f = f.need_double("wind_f");
    f.get("dt", s.dt);
    f.get("pad_halfwidth", s.pad_halfwidth);
    f.get("crash_speed", s.crash_speed);
    if (auto* v = f.find("action_mode")) {
      const std::string m = as_string(*v, f.path("action_mode"));
      if (m == "continuous") s.action_mode = LanderActionMode::Continuous2D;
      else if (m == "discrete9") s.action_mode = LanderActionMode::Discrete9;
      else bad(f.path("action_mode"), "must be continuous or discrete9");
    }
    f.get("main_thrust", s.main_thrust);
    f.get("lateral_thrust", s.lateral_thrust);
    f.get("start_height", s.start_height);
    f.get("start_spread", s.start_spread);
    f.get("shaping_coeff", s.shaping_coeff);
    f.get("world_halfwidth", s.world_halfwidth);
    f.get("ceiling", s.ceiling);
    f.get("land_reward", s.land_reward);
    f.get("crash_reward", s.crash_reward);
    env.spec = s;
    env.episode_cap = 300;
  } else {
    bad(f.path("kind"), "must be one of gridslip, frictioncar, windylander");
  }
  f.get("episode_cap", env.episode_cap);
  f.get("seed", env.seed);
  f.finish();
  try {
    std::visit([](const auto& s) { validate(s); }, env.spec);
  } catch (const Error& err) {
    throw ConfigError(path + ": " + err.what());
  }
  if (env.episode_cap <= 0) bad(f.path("episode_cap"), "must be positive");
  return env;
}

// Keys of env override those of env_defaults.
json merged_env(const json& defaults, const json& env, const std::string& path) {
  if (!env.is_object()) bad(path, "must be an object");
  json out = defaults;
  for (auto it = env.begin(); it != env.end(); ++it) out[it.key()] = it.value();
  return out;
}

KnowledgeConfig parse_knowledge(const json& j, const std::string& path) {
  KnowledgeConfig k;
  Fields f(j, path);
  const std::string trainer = as_string(f.need("trainer"), f.path("trainer"));
  if (trainer == "value_iteration") k.trainer = SourceTrainer::ValueIteration;
  else if (trainer == "q_learning") k.trainer = SourceTrainer::QLearning;
  else if (trainer == "policy_gradient") k.trainer = SourceTrainer::PolicyGradient;
  else if (trainer == "actor_critic") k.trainer = SourceTrainer::ActorCritic;
  else bad(f.path("trainer"), "must be one of value_iteration, q_learning, policy_gradient, actor_critic");

  f.get("gamma", k.q.gamma);
  k.pg.gamma = k.q.gamma;
  if (auto* v = f.find("q_learning")) {
    Fields q(*v, f.path("q_learning"));
    q.get("episodes", k.q.episodes);
    q.get("lr", k.q.lr);
    if (auto* e = q.find("epsilon")) k.q.epsilon = parse_epsilon(*e, q.path("epsilon"));
    q.get("seed", k.q.seed);
    q.finish();
  }
  if (auto* v = f.find("policy_gradient")) {
    Fields p(*v, f.path("policy_gradient"));
    p.get("episodes", k.pg.episodes);
    p.get("episodes_per_update", k.pg.episodes_per_update);
    p.get("actor_lr", k.pg.actor_lr);
    p.get("value_lr", k.pg.value_lr);
    p.get("critic_lr", k.pg.critic_lr);
    p.get("eval_episodes", k.pg.eval_episodes);
    p.get("success_threshold", k.pg.success_threshold);
    p.get("seed", k.pg.seed);
    p.finish();
  }
  if (auto* v = f.find("actor")) k.actor = parse_net(*v, f.path("actor"), k.actor);
  if (auto* v = f.find("critic")) k.critic = parse_net(*v, f.path("critic"), k.critic);
  f.get("as_policy", k.as_policy);
  if (k.as_policy && k.trainer != SourceTrainer::ValueIteration && k.trainer != SourceTrainer::QLearning)
    bad(f.path("as_policy"), "applies to value_iteration and q_learning only");
  f.finish();
  try {
    k.q.validate();
    k.pg.validate();
  } catch (const ConfigError& err) {
    bad(path, err.what());
  }
  return k;
}

ContextConfig parse_context(const json& j, const std::string& path) {
  ContextConfig c;
  Fields f(j, path);
  f.get("m_g", c.m_g);
  if (c.m_g == 0) bad(f.path("m_g"), "must be at least 1");
  f.get("seed", c.seed);
  if (auto* v = f.find("fit")) {
    Fields fit(*v, f.path("fit"));
    if (auto* n = fit.find("net")) c.fit.net = parse_net(*n, fit.path("net"), c.fit.net);
    fit.get("epochs", c.fit.epochs);
    fit.get("lr", c.fit.lr);
    fit.get("minibatch_size", c.fit.minibatch_size);
    fit.get("holdout_frac", c.fit.holdout_frac);
    fit.get("seed", c.fit.seed);
    fit.finish();
    try {
      c.fit.validate();
    } catch (const ConfigError& err) {
      bad(fit.path("fit"), err.what());
    }
  }
  if (auto* v = f.find("normalization")) {
    Fields n(*v, f.path("normalization"));
    const std::string kind = as_string(n.need("kind"), n.path("kind"));
    if (kind == "raw_sum") {
      c.normalization = NormalizationMode::raw_sum();
    } else if (kind == "per_sample_mean") {
      const double tau = n.need_double("tau");
      if (!(tau > 0.0)) bad(n.path("tau"), "must be positive");
      c.normalization = NormalizationMode::per_sample_mean(tau);
    } else {
      bad(n.path("kind"), "must be raw_sum or per_sample_mean");
    }
    n.finish();
  }
  f.finish();
  return c;
}

AdaptConfig parse_adapt(const json& j, const std::string& path) {
  AdaptConfig a;
  Fields f(j, path);
  f.get("iterations", a.iterations);
  f.get("lr", a.lr);
  f.get("temperature", a.temperature);
  f.get("beta", a.beta);
  f.get("gamma", a.gamma);
  f.get("minibatch_size", a.minibatch_size);
  f.get("rollout_episodes_per_iter", a.rollout_episodes_per_iter);
  f.get("replay_capacity", a.replay_capacity);
  f.get("replay_min_fill", a.replay_min_fill);
  if (auto* e = f.find("epsilon")) a.epsilon = parse_epsilon(*e, f.path("epsilon"));
  f.get("carol_plus_weight", a.carol_plus_weight);
  if (auto* v = f.find("optimizer")) {
    const std::string o = as_string(*v, f.path("optimizer"));
    if (o == "adam") a.optimizer = OptimizerKind::Adam;
    else if (o == "sgd") a.optimizer = OptimizerKind::Sgd;
    else bad(f.path("optimizer"), "must be adam or sgd");
  }
  f.get("eval_episodes", a.eval_episodes);
  f.finish();
  try {
    a.validate();
  } catch (const ConfigError& err) {
    bad(path, err.what());
  }
  return a;
}

StudentConfig parse_student(const json& j, const std::string& path) {
  StudentConfig s;
  Fields f(j, path);
  if (auto* v = f.find("policy")) s.policy = parse_net(*v, f.path("policy"), s.policy);
  if (auto* v = f.find("q")) {
    Fields q(*v, f.path("q"));
    if (auto* k = q.find("kind")) {
      const std::string kind = as_string(*k, q.path("kind"));
      if (kind == "tabular") s.q.kind = QModelConfig::Kind::Tabular;
      else if (kind == "network") s.q.kind = QModelConfig::Kind::Network;
      else bad(q.path("kind"), "must be tabular or network");
    }
    if (auto* n = q.find("net")) s.q.net = parse_net(*n, q.path("net"), s.q.net);
    q.finish();
  }
  f.finish();
  return s;
}

std::vector<std::uint64_t> parse_seeds(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) bad(path, "must be a nonempty array of seeds");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_u64(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

TaskHandle EnvConfig::make() const {
  return std::visit(
      [this](const auto& s) -> TaskHandle {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GridSlipSpec>) return make_gridslip(s, seed, episode_cap);
        else if constexpr (std::is_same_v<S, FrictionCarSpec>) return make_frictioncar(s, seed, episode_cap);
        else return make_windylander(s, seed, episode_cap);
      },
      spec);
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Carol: return "carol";
    case Method::CarolPlus: return "carol_plus";
    case Method::Pd: return "pd";
    case Method::Lfs: return "lfs";
    case Method::Sk: return "sk";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Carol, Method::CarolPlus, Method::Pd, Method::Lfs, Method::Sk})
    if (method_name(m) == name) return m;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected carol, carol_plus, pd, lfs or sk)");
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config is not valid JSON: ") + err.what());
  }
  ExperimentConfig cfg;
  Fields root(doc, "");
  cfg.experiment_id = as_string(root.need("experiment_id"), "experiment_id");
  if (cfg.experiment_id.empty()) bad("experiment_id", "must not be empty");

  json defaults = json::object();
  if (auto* d = root.find("env_defaults")) {
    if (!d->is_object()) bad("env_defaults", "must be an object");
    defaults = *d;
  }

  json merged_sources = json::array();
  const json& sources = root.need("sources");
  if (!sources.is_array() || sources.empty()) bad("sources", "must be a nonempty array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string path = "sources[" + std::to_string(i) + "]";
    Fields f(sources[i], path);
    SourceConfig src;
    src.name = as_string(f.need("name"), f.path("name"));
    if (src.name.empty() || src.name.find_first_of("/\\. ") != std::string::npos)
      bad(f.path("name"), "must be a nonempty file-name-safe token");
    if (!names.insert(src.name).second) bad(f.path("name"), "duplicates another source name");
    const json env = merged_env(defaults, f.need("env"), f.path("env"));
    src.env = parse_env(env, f.path("env"));
    f.finish();
    merged_sources.push_back(json{{"name", src.name}, {"env", env}});
    cfg.sources.push_back(std::move(src));
  }

  json merged_target;
  {
    Fields f(root.need("target"), "target");
    merged_target = merged_env(defaults, f.need("env"), "target.env");
    cfg.target = parse_env(merged_target, "target.env");
    f.finish();
  }

  json knowledge_doc = json::object();
  if (auto* v = root.find("knowledge")) {
    cfg.knowledge = parse_knowledge(*v, "knowledge");
    knowledge_doc = *v;
  } else {
    throw ConfigError("missing field 'knowledge'");
  }
  json context_doc = json::object();
  if (auto* v = root.find("context")) {
    cfg.context = parse_context(*v, "context");
    context_doc = *v;
  }
  if (auto* v = root.find("adapt")) cfg.adapt = parse_adapt(*v, "adapt");
  if (auto* v = root.find("student")) cfg.student = parse_student(*v, "student");

  const json& methods = root.need("methods");
  if (!methods.is_array() || methods.empty()) bad("methods", "must be a nonempty array");
  for (std::size_t i = 0; i < methods.size(); ++i)
    cfg.methods.push_back(parse_method(as_string(methods[i], "methods[" + std::to_string(i) + "]")));
  cfg.seeds = parse_seeds(root.need("seeds"), "seeds");
  if (auto* v = root.find("weights_file")) cfg.weights_file = as_string(*v, "weights_file");
  root.get("sk_episodes", cfg.sk_episodes);
  if (cfg.sk_episodes <= 0) bad("sk_episodes", "must be positive");
  root.finish();

  cfg.canonical = doc.dump();
  cfg.sources_canonical =
      json{{"sources", merged_sources}, {"knowledge", knowledge_doc}, {"context", context_doc}}.dump();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentConfig cfg;
  try {
    cfg = parse_config(text.str());
  } catch (const ConfigError& err) {
    throw ConfigError(path + ": " + err.what());
  }
  if (cfg.weights_file) {
    std::filesystem::path w(*cfg.weights_file);
    if (w.is_relative()) w = std::filesystem::path(path).parent_path() / w;
    cfg.weights_file = w.lexically_normal().string();
  }
  return cfg;
}

std::vector<double> load_weights_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weights file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError(path + ": weights file is not valid JSON: " + err.what());
  }
  Fields f(doc, "");
  const json& w = f.need("weights");
  if (!w.is_array() || w.empty()) bad("weights", "must be a nonempty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < w.size(); ++i) out.push_back(as_double(w[i], "weights[" + std::to_string(i) + "]"));
  f.finish();
  return out;
}

}  // namespace carol::harness
