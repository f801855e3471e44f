#include "scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <sstream>

#include "carol/carol.hpp"
#include "oracles/finite_diff.hpp"
#include "oracles/gridslip_dp.hpp"

namespace acceptance {

using namespace carol;
using harness::format_double;
using harness::Table;

namespace {

constexpr int kSeeds = 5;
constexpr int kFinalEvalEpisodes = 1000;
constexpr std::uint64_t kFinalEvalSeed = 4242;
constexpr std::size_t kProbeSize = 2000;

std::string fmt(double v) { return format_double(v); }

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// 3x5 grid: start left of a pit, goal right of it. Going straight across
// risks the pit; detours are longer. The best route depends on slip_p.
GridSlipSpec cliff(double p) {
  GridSlipSpec s;
  s.width = 3;
  s.height = 5;
  s.start = {0, 1};
  s.goal = {2, 1};
  s.pits = {{1, 1}};
  s.slip_p = p;
  return s;
}

TaskHandle cliff_target(double p) { return make_gridslip(cliff(p), 777, 100); }

std::vector<TransitionModel> fit_models(const std::vector<double>& ps, int seed) {
  std::vector<TransitionModel> models;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const TaskHandle t = make_gridslip(cliff(ps[i]), 1000 + seed * 10 + i, 100);
    const auto probe =
        collect_probe(t, UniformRandomProbe{}, kProbeSize, derive_seed({7, static_cast<std::uint64_t>(seed), i}));
    FitConfig fc;
    fc.net = {{64}, Activation::ReLU, derive_seed({11, static_cast<std::uint64_t>(seed), i})};
    fc.epochs = 30;
    fc.lr = 3e-3;
    fc.holdout_frac = 0.1;
    fc.seed = static_cast<std::uint64_t>(seed);
    models.push_back(fit_transition_model(t.space(), probe, fc).model);
  }
  return models;
}

std::vector<double> target_scores(const std::vector<TransitionModel>& models, double target_p, int seed,
                                  std::uint64_t probe_seed) {
  const TaskHandle t = make_gridslip(cliff(target_p), 5000 + seed, 100);
  const auto probe = collect_probe(t, UniformRandomProbe{}, kProbeSize, probe_seed);
  std::vector<double> ys;
  for (const TransitionModel& m : models) ys.push_back(prediction_error(m, probe));
  return ys;
}

SimilarityWeights cliff_weights(const std::vector<double>& source_ps, double target_p, int seed) {
  const auto models = fit_models(source_ps, seed);
  return similarity_weights(target_scores(models, target_p, seed, derive_seed({99, static_cast<std::uint64_t>(seed)})));
}

double final_return(const TaskHandle& target, const Knowledge& k) {
  return evaluate_knowledge(target, k, kFinalEvalEpisodes, kFinalEvalSeed).mean;
}

std::vector<Policy> optimal_policies(const std::vector<double>& ps) {
  std::vector<Policy> out;
  for (double p : ps) out.emplace_back(greedy_policy(value_iteration(make_gridslip(cliff(p)), 0.99)));
  return out;
}

AdaptConfig policy_adapt_config(int seed, int iterations) {
  AdaptConfig cfg;
  cfg.iterations = iterations;
  cfg.lr = 0.01;
  cfg.rollout_episodes_per_iter = 8;
  cfg.minibatch_size = 32;
  cfg.replay_min_fill = 32;
  cfg.seed = static_cast<std::uint64_t>(seed);
  return cfg;
}

NetConfig policy_student(int seed) { return {{32}, Activation::Tanh, derive_seed({3, static_cast<std::uint64_t>(seed)})}; }

void add_curve(Outcome& out, const std::string& name, const LearningCurve& curve) {
  out.tables.emplace_back(name, harness::curve_table(curve));
}

std::string summary(const char* label, const std::vector<double>& xs) {
  std::ostringstream s;
  s << label << " [";
  for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? " " : "") << fmt(std::round(xs[i] * 1000) / 1000);
  s << "]";
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. gradients

State random_state(const SpaceSpec& space, Rng& rng) {
  State s(static_cast<std::size_t>(space.state_dim), 0.0);
  if (space.env == EnvKind::GridSlip) s[rng.index(s.size())] = 1.0;
  else
    for (double& x : s) x = rng.uniform(-1.5, 1.5);
  return s;
}

Action random_action(const ActionSpec& spec, Rng& rng) {
  if (const auto* d = std::get_if<DiscreteActions>(&spec)) return static_cast<int>(rng.index(d->n));
  const auto& box = std::get<BoxActions>(spec);
  std::vector<double> a(box.lo.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(box.lo[i], box.hi[i]);
  return a;
}

Outcome c01_gradients() {
  Outcome out;
  Table t;
  t.columns = {"instance", "kind", "max_rel_error"};
  double worst = 0.0;
  Rng rng(derive_seed({0xc01}));
  const Activation acts[3] = {Activation::Identity, Activation::ReLU, Activation::Tanh};

  for (int i = 0; i < 100; ++i) {
    const Activation hidden = acts[i % 3];
    const Activation output = acts[(i / 3) % 3];
    std::vector<int> sizes{1 + static_cast<int>(rng.index(5))};
    const int depth = 1 + static_cast<int>(rng.index(3));
    for (int d = 0; d < depth; ++d) sizes.push_back(1 + static_cast<int>(rng.index(6)));
    sizes.push_back(1 + static_cast<int>(rng.index(4)));
    std::vector<Activation> hidden_acts(sizes.size() - 2, hidden);
    if (i % 7 == 0) hidden_acts.back() = acts[(i / 9) % 3];  // mixed stacks
    Mlp mlp = mlp_init(sizes, hidden_acts, output, derive_seed({0xc01, static_cast<std::uint64_t>(i)}));
    // random parameters, biases included
    for (double& p : mlp.params) p = rng.uniform(-1.0, 1.0);
    std::vector<double> x(sizes.front()), up(sizes.back());
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    for (double& v : up) v = rng.uniform(-1.0, 1.0);

    auto dot = [&up](const std::vector<double>& y) {
      double s = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) s += up[k] * y[k];
      return s;
    };
    const MlpGradients g = backward(mlp, x, up);
    const auto fd_params = oracle::central_gradient(
        [&](const std::vector<double>& p) {
          Mlp m = mlp;
          m.params = p;
          return dot(forward(m, x));
        },
        mlp.params, 1e-5);
    const auto fd_input =
        oracle::central_gradient([&](const std::vector<double>& xi) { return dot(forward(mlp, xi)); }, x, 1e-5);
    const double err = std::max(oracle::max_relative_error(g.params, fd_params),
                                oracle::max_relative_error(g.input, fd_input));
    worst = std::max(worst, err);
    t.rows.push_back({std::to_string(i), "mlp", fmt(err)});
  }

  // Composed losses on discrete and continuous spaces.
  const TaskHandle grid = make_gridslip(cliff(0.2));
  const TaskHandle car = make_frictioncar(FrictionCarSpec{});
  WindyLanderSpec lander_spec;
  lander_spec.action_mode = LanderActionMode::Discrete9;
  const TaskHandle lander = make_windylander(lander_spec);
  const double temps[2] = {1.0, 2.5};
  int instance = 100;
  auto record = [&](const char* kind, const std::vector<double>& analytic, const std::vector<double>& fd) {
    const double err = oracle::max_relative_error(analytic, fd);
    worst = std::max(worst, err);
    t.rows.push_back({std::to_string(instance++), kind, fmt(err)});
  };

  for (int rep = 0; rep < 2; ++rep) {
    for (const TaskHandle* task : {&grid, &car}) {
      const SpaceSpec& space = task->space();
      const NetConfig tanh_net{{8, 6}, Activation::Tanh, derive_seed({0xd15, static_cast<std::uint64_t>(rep)})};
      NetworkPolicy student = make_policy_net(space, tanh_net);
      std::vector<Policy> teachers{make_policy_net(space, {{5}, Activation::Tanh, 91u + rep}),
                                   make_policy_net(space, {{7}, Activation::ReLU, 92u + rep})};
      if (space.env == EnvKind::GridSlip)
        teachers.emplace_back(TabularPolicy{std::vector<int>{0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2}, 4});
      std::vector<double> raw(teachers.size());
      for (double& y : raw) y = rng.uniform(0.0, 2.0);
      const SimilarityWeights w = similarity_weights(raw);
      std::vector<State> states;
      for (int k = 0; k < 6; ++k) states.push_back(random_state(space, rng));

      const double temp = temps[rep];
      const LossAndGrad lp = policy_distill_loss(student, teachers, w, states, temp);
      record("distill", lp.grads, oracle::central_gradient(
                                      [&](const std::vector<double>& p) {
                                        NetworkPolicy s = student;
                                        s.net.params = p;
                                        return policy_distill_loss(s, teachers, w, states, temp).loss;
                                      },
                                      student.net.params));

      std::vector<NetworkQ> critics{make_q_net(space, {{6}, Activation::Tanh, 93u + rep}),
                                    make_q_net(space, {{5, 4}, Activation::Tanh, 94u + rep})};
      const SimilarityWeights w2 = similarity_weights(std::vector<double>{raw[0], raw[1]});
      const LossAndGrad lc = critic_guidance_loss(student, critics, w2, space.action, states);
      record("critic_guidance", lc.grads, oracle::central_gradient(
                                              [&](const std::vector<double>& p) {
                                                NetworkPolicy s = student;
                                                s.net.params = p;
                                                return critic_guidance_loss(s, critics, w2, space.action, states).loss;
                                              },
                                              student.net.params));
    }

    for (const TaskHandle* task : {&grid, &lander}) {
      const SpaceSpec& space = task->space();
      const NetworkQ q = make_q_net(space, {{8}, Activation::Tanh, 95u + rep});
      std::vector<TransitionSample> batch;
      std::vector<double> q_next;
      for (int k = 0; k < 8; ++k) {
        TransitionSample s;
        s.state = random_state(space, rng);
        s.action = random_action(space.action, rng);
        s.reward = rng.uniform(-2.0, 2.0);
        s.next_state = random_state(space, rng);
        batch.push_back(s);
        q_next.push_back(rng.uniform(-3.0, 3.0));
      }
      const LossAndGrad lt = td_loss(q, space.action, batch, q_next, 0.95);
      record("td", lt.grads, oracle::central_gradient(
                                 [&](const std::vector<double>& p) {
                                   NetworkQ m = q;
                                   m.net.params = p;
                                   return td_loss(m, space.action, batch, q_next, 0.95).loss;
                                 },
                                 q.net.params));
    }
  }

  out.pass = worst < 1e-4;
  out.detail = "max relative error " + fmt(worst) + " over " + std::to_string(instance) + " instances";
  out.tables.emplace_back("c01_gradients.csv", std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// 2. tabular oracle equivalence

GridSlipSpec open_grid(double p) {
  GridSlipSpec s;
  s.width = 3;
  s.height = 3;
  s.start = {0, 0};
  s.goal = {2, 2};
  s.slip_p = p;
  return s;
}

TrainConfig oracle_train_config() {
  TrainConfig c;
  c.episodes = 20000;
  c.lr = 0.01;
  c.gamma = 0.99;
  c.epsilon = {1.0, 0.05, 10000};
  c.seed = 0;
  return c;
}

Outcome c02_oracle() {
  Outcome out;
  Table t;
  t.columns = {"slip_p", "vi_vs_dp", "q_learning_vs_vi", "greedy_in_argmax_set"};

  const TaskHandle noisy = make_gridslip(open_grid(0.2));
  const QTable vi = value_iteration(noisy, 0.99);
  const auto dp = oracle::q_star(open_grid(0.2), 0.99);
  double vi_err = 0.0;
  for (std::size_t i = 0; i < dp.size(); ++i) vi_err = std::max(vi_err, std::fabs(vi.values[i] - dp[i]));
  const QTable q = train_q_tabular(noisy, oracle_train_config());
  double sup = 0.0;
  for (std::size_t i = 0; i < vi.values.size(); ++i) sup = std::max(sup, std::fabs(q.values[i] - vi.values[i]));
  t.rows.push_back({"0.2", fmt(vi_err), fmt(sup), ""});

  const TaskHandle det = make_gridslip(open_grid(0.0));
  const auto dp0 = oracle::q_star(open_grid(0.0), 0.99);
  const oracle::GridModel model = oracle::build_model(open_grid(0.0));
  const QTable q0 = train_q_tabular(det, oracle_train_config());
  const TabularPolicy pi = greedy_policy(q0);
  int matched = 0, states = 0;
  for (int s = 0; s < model.n_states; ++s) {
    if (model.absorbing[s]) continue;
    ++states;
    const double best = *std::max_element(dp0.begin() + s * 4, dp0.begin() + s * 4 + 4);
    if (std::fabs(dp0[s * 4 + pi.actions[s]] - best) < 1e-9) ++matched;
  }
  t.rows.push_back({"0", "", "", std::to_string(matched) + "/" + std::to_string(states)});

  out.pass = vi_err < 1e-8 && sup < 0.5 && matched == states;
  out.detail = "VI vs DP " + fmt(vi_err) + ", |Q-Q*|inf " + fmt(sup) + " (p=0.2), optimal actions " +
               std::to_string(matched) + "/" + std::to_string(states) + " (p=0)";
  out.tables.emplace_back("c02_oracle.csv", std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// 3. diagonal dominance

Outcome c03_diagonal() {
  Outcome out;
  Table t;
  t.columns = {"seed", "target_p", "w_0.05", "w_0.2", "w_0.5", "argmax_is_match"};
  const std::vector<double> ps{0.05, 0.2, 0.5};
  int hits = 0, cases = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto models = fit_models(ps, seed);
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const SimilarityWeights w = similarity_weights(
          target_scores(models, ps[j], seed, derive_seed({99, static_cast<std::uint64_t>(seed)})));
      const bool hit = argmax_lowest(w.weights) == static_cast<int>(j);
      hits += hit;
      ++cases;
      t.rows.push_back({std::to_string(seed), fmt(ps[j]), fmt(w.weights[0]), fmt(w.weights[1]), fmt(w.weights[2]),
                        hit ? "1" : "0"});
    }
  }
  out.pass = hits == cases;
  out.detail = std::to_string(hits) + "/" + std::to_string(cases) + " targets put the argmax on the matching source";
  out.tables.emplace_back("c03_similarity.csv", std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// 4. monotone similarity sweep

Outcome c04_monotone() {
  Outcome out;
  Table t;
  t.columns = {"seed", "target_p", "y_0.1", "y_0.5", "w1"};
  const std::vector<double> ps{0.1, 0.5};
  const std::vector<double> targets{0.1, 0.2, 0.3, 0.4, 0.5};
  const NormalizationMode mode = NormalizationMode::per_sample_mean(0.05);
  std::vector<std::vector<double>> w1(targets.size());
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto models = fit_models(ps, seed);
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const auto ys = target_scores(models, targets[j], seed, derive_seed({99, static_cast<std::uint64_t>(seed), j}));
      const SimilarityWeights w = similarity_weights(ys, mode, kProbeSize);
      w1[j].push_back(w.weights[0]);
      t.rows.push_back({std::to_string(seed), fmt(targets[j]), fmt(ys[0]), fmt(ys[1]), fmt(w.weights[0])});
    }
  }
  std::vector<double> med;
  for (const auto& v : w1) med.push_back(median(v));
  bool decreasing = true;
  for (std::size_t j = 1; j < med.size(); ++j) decreasing = decreasing && med[j] < med[j - 1];
  Table m;
  m.columns = {"target_p", "median_w1"};
  for (std::size_t j = 0; j < targets.size(); ++j) m.rows.push_back({fmt(targets[j]), fmt(med[j])});
  out.pass = decreasing;
  out.detail = summary("median w1", med);
  out.tables.emplace_back("c04_weights.csv", std::move(t));
  out.tables.emplace_back("c04_median_w1.csv", std::move(m));
  return out;
}

// ---------------------------------------------------------------------------
// 5. weight formula and convexity of the value target

Outcome c05_exactness() {
  Outcome out;
  Table t;
  t.columns = {"check", "value"};

  const SimilarityWeights w = similarity_weights(std::vector<double>{0.0, std::log(3.0)});
  const double exact_err = std::max(std::fabs(w.weights[0] - 0.75), std::fabs(w.weights[1] - 0.25));
  t.rows.push_back({"ln3_error", fmt(exact_err)});

  Rng rng(derive_seed({0xc05}));
  double shift_err = 0.0;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> ys(1 + rng.index(6));
    for (double& y : ys) y = rng.uniform(0.0, 50.0);
    const double c = rng.uniform(0.0, 1000.0);
    std::vector<double> shifted = ys;
    for (double& y : shifted) y += c;
    for (const NormalizationMode mode : {NormalizationMode::raw_sum(), NormalizationMode::per_sample_mean(0.3)}) {
      const auto a = similarity_weights(ys, mode, 7).weights;
      const auto b = similarity_weights(shifted, mode, 7).weights;
      for (std::size_t i = 0; i < a.size(); ++i) shift_err = std::max(shift_err, std::fabs(a[i] - b[i]));
    }
  }
  t.rows.push_back({"shift_error", fmt(shift_err)});

  int violations = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int n_sources = 1 + static_cast<int>(rng.index(5));
    const int n_states = 2 + static_cast<int>(rng.index(6));
    const int n_actions = 2 + static_cast<int>(rng.index(4));
    std::vector<QFunction> qs;
    for (int i = 0; i < n_sources; ++i) {
      TabularQ q = TabularQ::zeros(n_states, n_actions, 0.9);
      for (double& v : q.values) v = rng.uniform(-20.0, 20.0);
      qs.emplace_back(std::move(q));
    }
    std::vector<double> ys(n_sources);
    for (double& y : ys) y = rng.uniform(0.0, 5.0);
    const SimilarityWeights wi = similarity_weights(ys);
    const int s = static_cast<int>(rng.index(n_states));
    State onehot(n_states, 0.0);
    onehot[s] = 1.0;
    const double target = q_next_target(qs, wi, DiscreteActions{n_actions}, onehot);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const QFunction& q : qs) {
      const auto row = std::get<TabularQ>(q).row(s);
      const double best = *std::max_element(row.begin(), row.end());
      lo = std::min(lo, best);
      hi = std::max(hi, best);
    }
    if (!(lo <= target && target <= hi)) ++violations;
  }
  t.rows.push_back({"convexity_violations", std::to_string(violations)});

  out.pass = exact_err < 1e-12 && shift_err < 1e-12 && violations == 0;
  out.detail = "ln3 error " + fmt(exact_err) + ", shift error " + fmt(shift_err) + ", convexity violations " +
               std::to_string(violations) + "/1000";
  out.tables.emplace_back("c05_exactness.csv", std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// 6. distillation fixed point

Outcome c06_fixed_point() {
  Outcome out;
  Table t;
  t.columns = {"space", "grad_inf_norm"};
  Rng rng(derive_seed({0xc06}));
  double worst = 0.0;
  for (const TaskHandle& task : {make_gridslip(cliff(0.2)), make_frictioncar(FrictionCarSpec{})}) {
    const SpaceSpec& space = task.space();
    const NetworkPolicy teacher = make_policy_net(space, {{16}, Activation::Tanh, 61});
    const NetworkPolicy other = make_policy_net(space, {{16}, Activation::Tanh, 62});
    const std::vector<Policy> teachers{teacher, other};
    const SimilarityWeights w{{1.0, 0.0}, {}, {}};
    std::vector<State> states;
    for (int k = 0; k < 32; ++k) states.push_back(random_state(space, rng));
    const LossAndGrad l = policy_distill_loss(teacher, teachers, w, states, 1.0);
    double norm = 0.0;
    for (double g : l.grads) norm = std::max(norm, std::fabs(g));
    worst = std::max(worst, norm);
    t.rows.push_back({std::string(to_string(space.env)), fmt(norm)});
  }
  out.pass = worst < 1e-10;
  out.detail = "max |grad| " + fmt(worst);
  out.tables.emplace_back("c06_fixed_point.csv", std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// 7. target equal to a source

Outcome c07_sanity() {
  Outcome out;
  Table t;
  t.columns = {"seed", "w_0.1", "w_0.5", "carol_final", "sk_final", "agreement"};
  const std::vector<double> ps{0.1, 0.5};
  const std::vector<Policy> teachers = optimal_policies(ps);
  const TaskHandle target = cliff_target(0.1);
  const double sk = final_return(target, Knowledge{PolicyK{teachers[0]}, target.space()});

  // States the matching source visits on the target.
  std::vector<State> visited;
  const Actor teacher_actor = policy_actor(teachers[0], true);
  for (int i = 0; i < 200; ++i) {
    const Trajectory tr = rollout(target, teacher_actor, target.episode_cap(), eval_episode_seed(kFinalEvalSeed, i));
    for (const TransitionSample& s : tr.samples) visited.push_back(s.state);
  }

  std::vector<double> finals, agreements;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const SimilarityWeights w = cliff_weights(ps, 0.1, seed);
    const PolicyAdaptResult r =
        carol_policy_adapt(teachers, w, target, policy_student(seed), policy_adapt_config(seed, 60));
    const double fin = final_return(target, Knowledge{PolicyK{r.student}, target.space()});
    int agree = 0;
    for (const State& s : visited)
      agree += std::get<int>(greedy_action(Policy{r.student}, s)) == std::get<int>(greedy_action(teachers[0], s));
    const double frac = static_cast<double>(agree) / static_cast<double>(visited.size());
    finals.push_back(fin);
    agreements.push_back(frac);
    t.rows.push_back({std::to_string(seed), fmt(w.weights[0]), fmt(w.weights[1]), fmt(fin), fmt(sk), fmt(frac)});
    add_curve(out, "c07_curve_seed" + std::to_string(seed) + ".csv", r.curve);
  }
  const double med = median(finals), med_agree = median(agreements);
  out.pass = std::fabs(med - sk) <= 0.05 * std::fabs(sk) && med_agree >= 0.95;
  out.detail = "median final " + fmt(med) + " vs SK " + fmt(sk) + ", median agreement " + fmt(med_agree);
  out.tables.emplace_back("c07_summary.csv", std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// 8 and 9 share one set of value-based runs.

struct ValueRuns {
  std::vector<SimilarityWeights> weights;
  std::vector<ValueAdaptResult> carol;
  std::vector<LfsResult> lfs;
  std::vector<double> sk;
};

std::optional<ValueRuns> g_value_runs;

AdaptConfig value_adapt_config(int seed) {
  AdaptConfig cfg;
  cfg.iterations = 300;
  cfg.lr = 1e-3;
  cfg.optimizer = OptimizerKind::Adam;
  cfg.minibatch_size = 64;
  cfg.replay_min_fill = 128;
  cfg.epsilon = {1.0, 0.05, 150};
  cfg.eval_episodes = 50;
  cfg.seed = static_cast<std::uint64_t>(seed);
  return cfg;
}

QModelConfig value_student(int seed) {
  QModelConfig q;
  q.kind = QModelConfig::Kind::Network;
  q.net = {{64}, Activation::ReLU, derive_seed({5, static_cast<std::uint64_t>(seed)})};
  return q;
}

const ValueRuns& value_runs() {
  if (g_value_runs) return *g_value_runs;
  const std::vector<double> ps{0.1, 0.5};
  std::vector<QFunction> sources;
  for (double p : ps) sources.emplace_back(value_iteration(make_gridslip(cliff(p)), 0.99));
  const TaskHandle target = cliff_target(0.3);
  ValueRuns runs;
  for (const QFunction& q : sources) runs.sk.push_back(final_return(target, Knowledge{ValueK{q}, target.space()}));
  for (int seed = 0; seed < kSeeds; ++seed) {
    runs.weights.push_back(cliff_weights(ps, 0.3, seed));
    runs.carol.push_back(
        carol_value_adapt(sources, runs.weights.back(), target, value_student(seed), value_adapt_config(seed)));
    runs.lfs.push_back(lfs_train(target, value_student(seed), value_adapt_config(seed)));
  }
  g_value_runs = std::move(runs);
  return *g_value_runs;
}

Outcome c08_interpolated() {
  Outcome out;
  const ValueRuns& runs = value_runs();
  const TaskHandle target = cliff_target(0.3);
  Table t;
  t.columns = {"seed", "w_0.1", "w_0.5", "carol_final"};
  std::vector<double> finals;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const double fin = final_return(target, Knowledge{ValueK{runs.carol[seed].q}, target.space()});
    finals.push_back(fin);
    t.rows.push_back({std::to_string(seed), fmt(runs.weights[seed].weights[0]), fmt(runs.weights[seed].weights[1]),
                      fmt(fin)});
    add_curve(out, "c08_carol_curve_seed" + std::to_string(seed) + ".csv", runs.carol[seed].curve);
  }
  Table sk;
  sk.columns = {"source_p", "sk_final"};
  sk.rows.push_back({"0.1", fmt(runs.sk[0])});
  sk.rows.push_back({"0.5", fmt(runs.sk[1])});
  const double best_sk = std::max(runs.sk[0], runs.sk[1]);
  const double med = median(finals);
  out.pass = med >= best_sk;
  out.detail = "median final " + fmt(med) + " vs best single source " + fmt(best_sk) + "; " + summary("finals", finals);
  out.tables.emplace_back("c08_summary.csv", std::move(t));
  out.tables.emplace_back("c08_sk.csv", std::move(sk));
  return out;
}

constexpr long kNever = std::numeric_limits<long>::max();

long episodes_to(const LearningCurve& curve, double threshold) {
  for (const CurvePoint& p : curve)
    if (p.mean_return >= threshold) return p.episodes_seen;
  return kNever;
}

Outcome c09_speed() {
  Outcome out;
  const ValueRuns& runs = value_runs();
  Table t;
  t.columns = {"seed", "carol_final_point", "threshold", "carol_episodes", "lfs_episodes"};
  std::vector<double> carol_eps, lfs_eps;
  auto cell = [](long e) { return e == kNever ? std::string("never") : std::to_string(e); };
  for (int seed = 0; seed < kSeeds; ++seed) {
    const double fin = runs.carol[seed].curve.back().mean_return;
    const double threshold = fin - 0.1 * std::fabs(fin);
    const long c = episodes_to(runs.carol[seed].curve, threshold);
    const long l = episodes_to(runs.lfs[seed].curve, threshold);
    carol_eps.push_back(c == kNever ? std::numeric_limits<double>::infinity() : static_cast<double>(c));
    lfs_eps.push_back(l == kNever ? std::numeric_limits<double>::infinity() : static_cast<double>(l));
    t.rows.push_back({std::to_string(seed), fmt(fin), fmt(threshold), cell(c), cell(l)});
    add_curve(out, "c09_lfs_curve_seed" + std::to_string(seed) + ".csv", runs.lfs[seed].curve);
  }
  const double mc = median(carol_eps), ml = median(lfs_eps);
  out.pass = mc < ml;
  out.detail = "median episodes to 90% of CARoL final: CARoL " + fmt(mc) + ", LfS " + fmt(ml);
  out.tables.emplace_back("c09_speed.csv", std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// 10. CARoL vs uniform-weight distillation

Outcome c10_vs_pd() {
  Outcome out;
  Table t;
  t.columns = {"seed", "w_0.05", "w_0.6", "carol_final", "pd_final"};
  const std::vector<double> ps{0.05, 0.6};
  const std::vector<Policy> teachers = optimal_policies(ps);
  const TaskHandle target = cliff_target(0.05);
  std::vector<double> carol_f, pd_f;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const SimilarityWeights w = cliff_weights(ps, 0.05, seed);
    const AdaptConfig cfg = policy_adapt_config(seed, 60);
    const PolicyAdaptResult c = carol_policy_adapt(teachers, w, target, policy_student(seed), cfg);
    const PolicyAdaptResult pd = pd_adapt(teachers, target, policy_student(seed), cfg);
    carol_f.push_back(final_return(target, Knowledge{PolicyK{c.student}, target.space()}));
    pd_f.push_back(final_return(target, Knowledge{PolicyK{pd.student}, target.space()}));
    t.rows.push_back(
        {std::to_string(seed), fmt(w.weights[0]), fmt(w.weights[1]), fmt(carol_f.back()), fmt(pd_f.back())});
    add_curve(out, "c10_carol_curve_seed" + std::to_string(seed) + ".csv", c.curve);
    add_curve(out, "c10_pd_curve_seed" + std::to_string(seed) + ".csv", pd.curve);
  }
  const double mc = median(carol_f), mp = median(pd_f);
  out.pass = mc >= mp;
  out.detail = "median final CARoL " + fmt(mc) + " vs PD " + fmt(mp);
  out.tables.emplace_back("c10_summary.csv", std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// 11. beta = 0 collapse and the actor-critic decomposition

using Trace = std::vector<std::vector<double>>;

ParamObserver recorder(Trace& trace) {
  return [&trace](int, std::span<const double> p) { trace.emplace_back(p.begin(), p.end()); };
}

bool bitwise_equal(const Trace& a, const Trace& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].size() != b[i].size() || std::memcmp(a[i].data(), b[i].data(), a[i].size() * sizeof(double)) != 0)
      return false;
  return true;
}

bool bitwise_equal(const LossAndGrad& a, const LossAndGrad& b) {
  return std::memcmp(&a.loss, &b.loss, sizeof(double)) == 0 && a.grads.size() == b.grads.size() &&
         std::memcmp(a.grads.data(), b.grads.data(), a.grads.size() * sizeof(double)) == 0;
}

Outcome c11_beta_zero() {
  Outcome out;
  Table t;
  t.columns = {"check", "space", "result"};
  bool ok = true;
  Rng rng(derive_seed({0xc11}));

  const std::vector<TaskHandle> targets{cliff_target(0.3), make_frictioncar(FrictionCarSpec{}, 3, 60)};
  for (const TaskHandle& target : targets) {
    const SpaceSpec& space = target.space();
    std::vector<Policy> actors;
    std::vector<NetworkQ> critics;
    for (std::uint64_t i = 0; i < 2; ++i) {
      actors.emplace_back(make_policy_net(space, {{16}, Activation::Tanh, 70 + i}));
      critics.push_back(make_q_net(space, {{16}, Activation::Tanh, 80 + i}));
    }
    const SimilarityWeights w{{0.7, 0.3}, {}, {}};
    AdaptConfig cfg = policy_adapt_config(11, 6);
    cfg.rollout_episodes_per_iter = 2;
    cfg.eval_episodes = 2;
    cfg.beta = 0.0;
    const NetConfig student{{16}, Activation::Tanh, 99};
    Trace a, b;
    const PolicyAdaptResult ra = carol_ac_adapt(actors, critics, w, target, student, cfg, recorder(a));
    const PolicyAdaptResult rb = carol_policy_adapt(actors, w, target, student, cfg, recorder(b));
    const bool same = bitwise_equal(a, b) && ra.curve == rb.curve && !a.empty();
    ok = ok && same;
    t.rows.push_back({"beta0_trajectory", std::string(to_string(space.env)), same ? "identical" : "differs"});

    int exact = 0;
    for (int k = 0; k < 20; ++k) {
      const NetworkPolicy s = make_policy_net(space, {{8}, Activation::Tanh, 200u + k});
      std::vector<State> states;
      for (int j = 0; j < 5; ++j) states.push_back(random_state(space, rng));
      const double beta = rng.uniform(0.0, 3.0);
      const double temp = rng.uniform(0.5, 2.0);
      const LossAndGrad lac = actor_critic_loss(s, actors, critics, w, space.action, states, temp, beta);
      LossAndGrad sum = policy_distill_loss(s, actors, w, states, temp);
      const LossAndGrad lc = critic_guidance_loss(s, critics, w, space.action, states);
      sum.loss += beta * lc.loss;
      for (std::size_t i = 0; i < sum.grads.size(); ++i) sum.grads[i] += beta * lc.grads[i];
      exact += bitwise_equal(lac, sum);
    }
    ok = ok && exact == 20;
    t.rows.push_back({"decomposition", std::string(to_string(space.env)), std::to_string(exact) + "/20"});
  }
  out.pass = ok;
  out.detail = ok ? "beta=0 trajectories identical; L_AC = L_P + beta L_C exact on 40 batches"
                  : "mismatch, see c11_beta_zero.csv";
  out.tables.emplace_back("c11_beta_zero.csv", std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// 12. extrapolated target

Outcome c12_carol_plus() {
  Outcome out;
  Table t;
  t.columns = {"seed", "w_0.1", "w_0.5", "carol_final", "carol_plus_final"};
  const std::vector<double> ps{0.1, 0.5};
  const std::vector<Policy> teachers = optimal_policies(ps);
  const TaskHandle target = cliff_target(0.7);
  std::vector<double> carol_f, plus_f;
  bool lambda_zero_identical = true;
  Rng rng(derive_seed({0xc12}));
  for (int seed = 0; seed < kSeeds; ++seed) {
    const SimilarityWeights w = cliff_weights(ps, 0.7, seed);
    AdaptConfig cfg = policy_adapt_config(seed, 200);
    Trace base_trace, zero_trace;
    const PolicyAdaptResult c =
        carol_policy_adapt(teachers, w, target, policy_student(seed), cfg, recorder(base_trace));
    cfg.carol_plus_weight = 3.0;
    const PolicyAdaptResult plus = carol_policy_adapt(teachers, w, target, policy_student(seed), cfg);
    carol_f.push_back(final_return(target, Knowledge{PolicyK{c.student}, target.space()}));
    plus_f.push_back(final_return(target, Knowledge{PolicyK{plus.student}, target.space()}));
    t.rows.push_back(
        {std::to_string(seed), fmt(w.weights[0]), fmt(w.weights[1]), fmt(carol_f.back()), fmt(plus_f.back())});
    add_curve(out, "c12_carol_curve_seed" + std::to_string(seed) + ".csv", c.curve);
    add_curve(out, "c12_carol_plus_curve_seed" + std::to_string(seed) + ".csv", plus.curve);

    if (seed == 0) {
      // CARoL+ with lambda = 0 through the combined-loss path.
      detail::PolicyLoopTerms terms;
      terms.teachers = &teachers;
      terms.standard_weight = 0.0;
      AdaptConfig zero = policy_adapt_config(seed, 200);
      zero.carol_plus_weight = 0.0;
      detail::policy_loop(terms, w, target, policy_student(seed), zero, recorder(zero_trace));
      lambda_zero_identical = lambda_zero_identical && bitwise_equal(base_trace, zero_trace);
    }
  }
  // Loss-level identity on random batches.
  const SpaceSpec space = target.space();
  for (int k = 0; k < 20; ++k) {
    const NetworkPolicy s = make_policy_net(space, {{8}, Activation::Tanh, 300u + k});
    std::vector<State> states;
    std::vector<Action> acts;
    std::vector<double> adv;
    for (int j = 0; j < 6; ++j) {
      states.push_back(random_state(space, rng));
      acts.emplace_back(static_cast<int>(rng.index(4)));
      adv.push_back(rng.uniform(-5.0, 5.0));
    }
    const LossAndGrad base = policy_distill_loss(s, teachers, SimilarityWeights{{0.4, 0.6}, {}, {}}, states, 1.0);
    const LossAndGrad combined = carol_plus_loss(CarolLossKind::Policy, base, StandardLossKind::PolicyGradient,
                                                 reinforce_loss(s, states, acts, adv), 0.0);
    lambda_zero_identical = lambda_zero_identical && bitwise_equal(base, combined);
  }
  const double mc = median(carol_f), mp = median(plus_f);
  out.pass = mp >= mc && lambda_zero_identical;
  out.detail = "median final CARoL+ " + fmt(mp) + " vs CARoL " + fmt(mc) + "; lambda=0 " +
               (lambda_zero_identical ? "identical" : "differs");
  out.tables.emplace_back("c12_summary.csv", std::move(t));
  return out;
}

}  // namespace

void reset_shared_state() { g_value_runs.reset(); }

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "gradient correctness", 60, c01_gradients},
      {2, "tabular oracle equivalence", 60, c02_oracle},
      {3, "similarity diagonal dominance", 120, c03_diagonal},
      {4, "similarity monotonicity", 180, c04_monotone},
      {5, "weight exactness and value-target convexity", 0, c05_exactness},
      {6, "distillation fixed point", 0, c06_fixed_point},
      {7, "policy CARoL on a source task", 300, c07_sanity},
      {8, "value CARoL beats single sources on an interpolated target", 300, c08_interpolated},
      {9, "CARoL converges faster than LfS", 600, c09_speed},
      {10, "CARoL vs PD with a far-off source", 600, c10_vs_pd},
      {11, "beta=0 collapse and L_AC decomposition", 0, c11_beta_zero},
      {12, "CARoL+ on an extrapolated target", 600, c12_carol_plus},
  };
  return all;
}

}  // namespace acceptance
