#pragma once

// Independent GridSlip model for tests. Built from the spec fields alone so
// it shares no code with the library's environment or value iteration.

#include <algorithm>
#include <cmath>
#include <vector>

#include "carol/env_specs.hpp"

namespace oracle {

struct Outcome {
  int next = 0;
  double prob = 0.0;
  double reward = 0.0;
  bool terminal = false;
};

struct GridModel {
  int n_states = 0;
  std::vector<bool> absorbing;
  std::vector<std::vector<std::vector<Outcome>>> law;  // [s][a] -> outcomes
};

inline GridModel build_model(const carol::GridSlipSpec& g) {
  const int n = g.width * g.height;
  auto index = [&](int x, int y) { return y * g.width + x; };
  auto is_pit = [&](int x, int y) {
    return std::any_of(g.pits.begin(), g.pits.end(), [&](const carol::Cell& c) { return c.x == x && c.y == y; });
  };
  // up, right, down, left with y growing downward
  const int dx[4] = {0, 1, 0, -1};
  const int dy[4] = {-1, 0, 1, 0};

  GridModel m;
  m.n_states = n;
  m.absorbing.assign(n, false);
  m.law.assign(n, std::vector<std::vector<Outcome>>(4));
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const int s = index(x, y);
      if ((x == g.goal.x && y == g.goal.y) || is_pit(x, y)) m.absorbing[s] = true;
      for (int a = 0; a < 4; ++a) {
        const double probs[3] = {1.0 - g.slip_p, g.slip_p / 2, g.slip_p / 2};
        const int dirs[3] = {a, (a + 1) % 4, (a + 3) % 4};
        for (int k = 0; k < 3; ++k) {
          if (probs[k] == 0.0) continue;
          int nx = x + dx[dirs[k]], ny = y + dy[dirs[k]];
          if (nx < 0 || ny < 0 || nx >= g.width || ny >= g.height) nx = x, ny = y;
          Outcome o;
          o.next = index(nx, ny);
          o.prob = probs[k];
          o.reward = g.step_reward;
          if (nx == g.goal.x && ny == g.goal.y) o.reward += g.goal_reward, o.terminal = true;
          else if (is_pit(nx, ny)) o.reward += g.pit_reward, o.terminal = true;
          m.law[s][a].push_back(o);
        }
      }
    }
  return m;
}

/// Q* by plain value iteration; absorbing rows stay zero.
inline std::vector<double> q_star(const carol::GridSlipSpec& g, double gamma, int sweeps = 20000) {
  const GridModel m = build_model(g);
  std::vector<double> v(m.n_states, 0.0), q(m.n_states * 4, 0.0);
  for (int it = 0; it < sweeps; ++it) {
    double delta = 0.0;
    for (int s = 0; s < m.n_states; ++s) {
      if (m.absorbing[s]) continue;
      for (int a = 0; a < 4; ++a) {
        double total = 0.0;
        for (const Outcome& o : m.law[s][a]) total += o.prob * (o.reward + (o.terminal ? 0.0 : gamma * v[o.next]));
        q[s * 4 + a] = total;
      }
    }
    for (int s = 0; s < m.n_states; ++s) {
      if (m.absorbing[s]) continue;
      const double best = *std::max_element(q.begin() + s * 4, q.begin() + s * 4 + 4);
      delta = std::max(delta, std::fabs(best - v[s]));
      v[s] = best;
    }
    if (delta < 1e-13) break;
  }
  return q;
}

/// Discounted value of a deterministic tabular policy, no time limit.
inline std::vector<double> policy_value(const carol::GridSlipSpec& g, const std::vector<int>& policy, double gamma,
                                        int sweeps = 200000) {
  const GridModel m = build_model(g);
  std::vector<double> v(m.n_states, 0.0);
  for (int it = 0; it < sweeps; ++it) {
    double delta = 0.0;
    for (int s = 0; s < m.n_states; ++s) {
      if (m.absorbing[s]) continue;
      double total = 0.0;
      for (const Outcome& o : m.law[s][policy[s]]) total += o.prob * (o.reward + (o.terminal ? 0.0 : gamma * v[o.next]));
      delta = std::max(delta, std::fabs(total - v[s]));
      v[s] = total;
    }
    if (delta < 1e-13) break;
  }
  return v;
}

}  // namespace oracle
