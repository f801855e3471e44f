#pragma once

#include <compare>
#include <vector>

namespace carol {

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

/// Tabular slip world. Context axis: slip_p. A slipped move goes to one of
/// the two perpendicular neighbours with equal probability, never backward.
/// Moving into a wall leaves the agent in place. Entering the goal or a pit
/// ends the episode; every step costs step_reward on top of any bonus.
struct GridSlipSpec {
  int width = 5;
  int height = 5;
  Cell start{0, 0};
  Cell goal{4, 4};
  std::vector<Cell> pits;
  double slip_p = 0.0;
  double step_reward = -1.0;
  double goal_reward = 20.0;
  double pit_reward = -20.0;

  bool operator==(const GridSlipSpec&) const = default;
};

/// 1-D car on a straight track. Context axis: friction_mu.
///   v' = v + (thrust_gain * u - friction_mu * v) * dt,  x' = x + v * dt
/// Reward is the progress x' - x; exceeding velocity_cap adds crash_reward
/// and ends the episode, as does reaching track_length.
struct FrictionCarSpec {
  double friction_mu = 1.0;
  double thrust_gain = 4.0;
  double dt = 0.05;
  double track_length = 15.0;
  double velocity_cap = 3.0;
  double crash_reward = -50.0;

  bool operator==(const FrictionCarSpec&) const = default;
};

enum class LanderActionMode { Continuous2D, Discrete9 };

/// Point-mass lander. Context axes: gravity_g (vertical) and wind_f, a
/// constant horizontal acceleration. State is (x, y, vx, vy); the pad is
/// centred at the origin. Actions are (main, lateral) in [-1, 1]^2; the main
/// engine throttle is (main + 1) / 2 so main = -1 means engine off.
struct WindyLanderSpec {
  double gravity_g = -10.0;
  double wind_f = 0.0;
  double dt = 0.05;
  double pad_halfwidth = 2.0;
  double crash_speed = 2.0;
  LanderActionMode action_mode = LanderActionMode::Continuous2D;
  double main_thrust = 20.0;
  double lateral_thrust = 15.0;
  double start_height = 10.0;
  double start_spread = 2.0;
  double shaping_coeff = 0.01;
  double world_halfwidth = 15.0;
  double ceiling = 20.0;
  double land_reward = 100.0;
  double crash_reward = -100.0;

  bool operator==(const WindyLanderSpec&) const = default;
};

}  // namespace carol
