#include "carol/envs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "carol/error.hpp"
#include "carol/rollout.hpp"

namespace carol {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::string range_message(const char* name, double value, const char* range) {
  std::ostringstream os;
  os << name << " = " << value << " outside " << range;
  return os.str();
}

bool inside(const GridSlipSpec& spec, Cell c) { return c.x >= 0 && c.y >= 0 && c.x < spec.width && c.y < spec.height; }

}  // namespace

void validate(const GridSlipSpec& spec) {
  require(spec.width > 0 && spec.height > 0, "gridslip width and height must be positive");
  require(std::isfinite(spec.slip_p) && spec.slip_p >= 0.0 && spec.slip_p <= 1.0,
          range_message("slip_p", spec.slip_p, "[0, 1]"));
  require(inside(spec, spec.start), "gridslip start cell outside the grid");
  require(inside(spec, spec.goal), "gridslip goal cell outside the grid");
  require(spec.start != spec.goal, "gridslip start and goal must differ");
  for (const Cell& pit : spec.pits) {
    require(inside(spec, pit), "gridslip pit outside the grid");
    require(pit != spec.start && pit != spec.goal, "gridslip pit may not coincide with start or goal");
  }
}

void validate(const FrictionCarSpec& spec) {
  require(std::isfinite(spec.friction_mu) && spec.friction_mu >= 0.0,
          range_message("friction_mu", spec.friction_mu, "[0, inf)"));
  require(spec.dt > 0.0 && spec.dt <= 0.1, range_message("dt", spec.dt, "(0, 0.1]"));
  require(spec.track_length > 0.0, "track_length must be positive");
  require(spec.velocity_cap > 0.0, "velocity_cap must be positive");
}

void validate(const WindyLanderSpec& spec) {
  require(std::isfinite(spec.gravity_g) && spec.gravity_g >= -12.0 && spec.gravity_g <= -2.0,
          range_message("gravity_g", spec.gravity_g, "[-12, -2]"));
  require(std::isfinite(spec.wind_f) && spec.wind_f >= 0.0 && spec.wind_f <= 10.0,
          range_message("wind_f", spec.wind_f, "[0, 10]"));
  require(spec.dt > 0.0, "dt must be positive");
  require(spec.pad_halfwidth > 0.0, "pad_halfwidth must be positive");
  require(spec.crash_speed > 0.0, "crash_speed must be positive");
  require(spec.start_height > 0.0 && spec.start_height < spec.ceiling, "start_height must lie in (0, ceiling)");
}

TaskHandle make_gridslip(const GridSlipSpec& spec, std::uint64_t seed, int episode_cap) {
  return TaskHandle(spec, seed, episode_cap);
}
TaskHandle make_frictioncar(const FrictionCarSpec& spec, std::uint64_t seed, int episode_cap) {
  return TaskHandle(spec, seed, episode_cap);
}
TaskHandle make_windylander(const WindyLanderSpec& spec, std::uint64_t seed, int episode_cap) {
  return TaskHandle(spec, seed, episode_cap);
}

namespace gridslip {

int cell_index(const GridSlipSpec& spec, Cell c) { return c.y * spec.width + c.x; }

Cell cell_at(const GridSlipSpec& spec, int index) { return Cell{index % spec.width, index / spec.width}; }

State one_hot(const GridSlipSpec& spec, Cell c) {
  State s(static_cast<std::size_t>(spec.width * spec.height), 0.0);
  s[cell_index(spec, c)] = 1.0;
  return s;
}

int state_index(std::span<const double> state) {
  int found = -1;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i] == 1.0) {
      if (found >= 0) throw DomainError("gridslip state is not one-hot");
      found = static_cast<int>(i);
    } else if (state[i] != 0.0) {
      throw DomainError("gridslip state is not one-hot");
    }
  }
  if (found < 0) throw DomainError("gridslip state is not one-hot");
  return found;
}

bool is_terminal(const GridSlipSpec& spec, Cell c) {
  return c == spec.goal || std::find(spec.pits.begin(), spec.pits.end(), c) != spec.pits.end();
}

Cell neighbour(const GridSlipSpec& spec, Cell c, int move) {
  static constexpr int dx[4] = {0, 1, 0, -1};
  static constexpr int dy[4] = {-1, 0, 1, 0};
  Cell n{c.x + dx[move], c.y + dy[move]};
  return inside(spec, n) ? n : c;
}

double entry_reward(const GridSlipSpec& spec, Cell c) {
  double r = spec.step_reward;
  if (c == spec.goal) r += spec.goal_reward;
  else if (is_terminal(spec, c)) r += spec.pit_reward;
  return r;
}

}  // namespace gridslip

TabularDynamics exact_transition_matrix(const TaskHandle& task) {
  const auto* spec = std::get_if<GridSlipSpec>(&task.spec());
  if (spec == nullptr)
    throw UnsupportedError("exact transition matrix requires a tabular task, got " +
                           std::string(to_string(task.env_kind())));
  TabularDynamics dyn;
  dyn.n_states = spec->width * spec->height;
  dyn.n_actions = gridslip::kActions;
  dyn.start_state = gridslip::cell_index(*spec, spec->start);
  const auto n = static_cast<std::size_t>(dyn.n_states);
  dyn.transition.assign(dyn.n_actions, std::vector<double>(n * n, 0.0));
  dyn.entry_reward.resize(n);
  dyn.terminal.resize(n);
  const double p = spec->slip_p;
  for (int s = 0; s < dyn.n_states; ++s) {
    const Cell c = gridslip::cell_at(*spec, s);
    dyn.entry_reward[s] = gridslip::entry_reward(*spec, c);
    dyn.terminal[s] = gridslip::is_terminal(*spec, c);
    for (int a = 0; a < dyn.n_actions; ++a) {
      auto& row = dyn.transition[a];
      if (dyn.terminal[s]) {
        row[s * n + s] = 1.0;
        continue;
      }
      const std::pair<int, double> outcomes[3] = {{a, 1.0 - p}, {(a + 1) % 4, p / 2.0}, {(a + 3) % 4, p / 2.0}};
      for (const auto& [move, prob] : outcomes)
        row[s * n + gridslip::cell_index(*spec, gridslip::neighbour(*spec, c, move))] += prob;
    }
  }
  return dyn;
}

namespace {

void check_state_dim(const TaskHandle& task, std::span<const double> state) {
  if (static_cast<int>(state.size()) != task.state_dim())
    throw DomainError("state dimension " + std::to_string(state.size()) + " does not match task dimension " +
                      std::to_string(task.state_dim()));
}

StepResult step_gridslip(const GridSlipSpec& spec, std::span<const double> state, int action, Rng& rng) {
  const Cell c = gridslip::cell_at(spec, gridslip::state_index(state));
  if (gridslip::is_terminal(spec, c)) return {State(state.begin(), state.end()), 0.0, true};
  const double u = rng.uniform();
  int move = action;
  if (u >= 1.0 - spec.slip_p) move = (u < 1.0 - spec.slip_p / 2.0) ? (action + 1) % 4 : (action + 3) % 4;
  const Cell next = gridslip::neighbour(spec, c, move);
  return {gridslip::one_hot(spec, next), gridslip::entry_reward(spec, next), gridslip::is_terminal(spec, next)};
}

StepResult step_frictioncar(const FrictionCarSpec& spec, std::span<const double> state, double u) {
  const double x = state[0];
  const double v = state[1];
  const double v_next = v + (spec.thrust_gain * u - spec.friction_mu * v) * spec.dt;
  const double x_next = x + v * spec.dt;
  StepResult out{{x_next, v_next}, x_next - x, false};
  if (std::abs(v_next) > spec.velocity_cap) {
    out.reward += spec.crash_reward;
    out.done = true;
  } else if (x_next >= spec.track_length) {
    out.done = true;
  }
  return out;
}

StepResult step_windylander(const WindyLanderSpec& spec, std::span<const double> state, double main, double lateral) {
  const double throttle = (main + 1.0) / 2.0;
  const double ax = spec.wind_f + spec.lateral_thrust * lateral;
  const double ay = spec.gravity_g + spec.main_thrust * throttle;
  const double x = state[0] + state[2] * spec.dt;
  const double y = state[1] + state[3] * spec.dt;
  const double vx = state[2] + ax * spec.dt;
  const double vy = state[3] + ay * spec.dt;
  StepResult out{{x, y, vx, vy}, -spec.shaping_coeff * std::hypot(x, y), false};
  if (y <= 0.0) {
    const bool soft = std::abs(x) <= spec.pad_halfwidth && std::hypot(vx, vy) <= spec.crash_speed;
    out.reward += soft ? spec.land_reward : spec.crash_reward;
    out.done = true;
  } else if (std::abs(x) > spec.world_halfwidth || y > spec.ceiling) {
    out.reward += spec.crash_reward;
    out.done = true;
  }
  return out;
}

State initial_state(const TaskHandle& task, Rng& rng) {
  if (const auto* g = std::get_if<GridSlipSpec>(&task.spec())) return gridslip::one_hot(*g, g->start);
  if (std::holds_alternative<FrictionCarSpec>(task.spec())) return {0.0, 0.0};
  const auto& w = std::get<WindyLanderSpec>(task.spec());
  return {rng.uniform(-w.start_spread, w.start_spread), w.start_height, 0.0, 0.0};
}

}  // namespace

std::uint64_t episode_env_seed(const TaskHandle& task, std::uint64_t episode_seed) {
  return derive_seed({task.seed(), episode_seed});
}

std::uint64_t episode_actor_seed(const TaskHandle& task, std::uint64_t episode_seed) {
  return derive_seed({task.seed(), episode_seed, 0xac7042ULL});
}

State env_reset(const TaskHandle& task, std::uint64_t episode_seed) {
  Rng rng(episode_env_seed(task, episode_seed));
  return initial_state(task, rng);
}

Action executed_action(const TaskHandle& task, const Action& action) {
  const ActionSpec& spec = task.action_spec();
  if (const auto* d = std::get_if<DiscreteActions>(&spec)) {
    const int* idx = std::get_if<int>(&action);
    if (idx == nullptr) throw DomainError("continuous action given to a discrete action space");
    if (*idx < 0 || *idx >= d->n)
      throw DomainError("action index " + std::to_string(*idx) + " outside [0, " + std::to_string(d->n) + ")");
    return action;
  }
  const auto& box = std::get<BoxActions>(spec);
  const auto* v = std::get_if<std::vector<double>>(&action);
  if (v == nullptr) throw DomainError("discrete action given to a continuous action space");
  if (v->size() != box.lo.size()) throw DomainError("action dimension mismatch");
  std::vector<double> out(*v);
  for (std::size_t d = 0; d < out.size(); ++d) {
    if (!std::isfinite(out[d])) throw DomainError("non-finite action component");
    if (out[d] < box.lo[d] || out[d] > box.hi[d]) {
      if (!box.clamps) throw DomainError("action component outside the action box");
      out[d] = std::clamp(out[d], box.lo[d], box.hi[d]);
    }
  }
  return out;
}

StepResult env_step(const TaskHandle& task, std::span<const double> state, const Action& action, Rng& rng) {
  check_state_dim(task, state);
  const Action a = executed_action(task, action);
  if (const auto* g = std::get_if<GridSlipSpec>(&task.spec())) return step_gridslip(*g, state, std::get<int>(a), rng);
  if (const auto* f = std::get_if<FrictionCarSpec>(&task.spec()))
    return step_frictioncar(*f, state, std::get<std::vector<double>>(a)[0]);
  const auto& w = std::get<WindyLanderSpec>(task.spec());
  if (const int* k = std::get_if<int>(&a)) return step_windylander(w, state, *k / 3 - 1.0, *k % 3 - 1.0);
  const auto& v = std::get<std::vector<double>>(a);
  return step_windylander(w, state, v[0], v[1]);
}

Episode::Episode(const TaskHandle& task, std::uint64_t episode_seed)
    : task_(&task), rng_(episode_env_seed(task, episode_seed)) {
  state_ = initial_state(task, rng_);
}

TransitionSample Episode::step(const Action& action) {
  if (done_) throw DomainError("step called on a finished episode");
  const Action executed = executed_action(*task_, action);
  StepResult r = env_step(*task_, state_, executed, rng_);
  ++steps_;
  done_ = r.done || steps_ >= task_->episode_cap();
  TransitionSample sample{state_, executed, r.reward, r.next_state, done_, done_ && !r.done};
  state_ = std::move(r.next_state);
  return sample;
}

}  // namespace carol
